from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


class Group(Enum):
    DEMENTIA = 1
    CONTROL = 0

    @staticmethod
    def from_string(value: str) -> "Group":
        v = value.strip().lower()
        if v == "dementia":
            return Group.DEMENTIA
        if v == "control":
            return Group.CONTROL
        raise ValueError("unknown group '{}', expected dementia or control".format(value))

    def to_string(self) -> str:
        return self.name.lower()


class SpeakerRole(Enum):
    PARTICIPANT = 0
    INVESTIGATOR = 1


class ProvenanceKind(Enum):
    ORIGINAL = 0
    AUGMENTED = 1


@dataclass(frozen=True)
class Token:
    surface: str
    start_ms: Optional[int] = None
    end_ms: Optional[int] = None
    interpolated: bool = False

    def __post_init__(self):
        if len(self.surface.strip()) == 0:
            raise ValueError("empty token surface")
        if self.start_ms is not None and self.end_ms is not None:
            if self.start_ms < 0 or self.start_ms > self.end_ms:
                raise ValueError("invalid token interval ({}, {})".format(self.start_ms, self.end_ms))

    @property
    def has_timestamps(self) -> bool:
        return self.start_ms is not None and self.end_ms is not None

    def with_surface(self, surface: str) -> "Token":
        return Token(surface=surface, start_ms=self.start_ms, end_ms=self.end_ms,
                     interpolated=self.interpolated)


@dataclass(frozen=True)
class Utterance:
    speaker: str
    tokens: Tuple[Token, ...]
    raw: str


@dataclass
class Transcript:
    id: str
    group: Optional[Group]
    utterances: List[Utterance]
    header_meta: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Provenance:
    kind: ProvenanceKind = ProvenanceKind.ORIGINAL
    parent_index: Optional[int] = None
    replaced_position: Optional[int] = None
    synonym_used: Optional[str] = None

    @staticmethod
    def original() -> "Provenance":
        return Provenance()

    @staticmethod
    def augmented(parent_index: int, replaced_position: int, synonym_used: str) -> "Provenance":
        return Provenance(kind=ProvenanceKind.AUGMENTED,
                          parent_index=parent_index,
                          replaced_position=replaced_position,
                          synonym_used=synonym_used)

    @property
    def is_original(self) -> bool:
        return self.kind == ProvenanceKind.ORIGINAL

    def to_string(self) -> str:
        if self.is_original:
            return "original"
        return "augmented(parent={},position={},synonym={})".format(self.parent_index,
                                                                     self.replaced_position,
                                                                     self.synonym_used)


@dataclass(frozen=True)
class SentenceRecord:
    transcript_id: str
    index: int
    tokens: Tuple[Token, ...]
    label: Group
    speaker_role: SpeakerRole
    provenance: Provenance = Provenance()

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise ValueError("a sentence record needs at least one token")
        if self.speaker_role == SpeakerRole.INVESTIGATOR and self.label != Group.CONTROL:
            raise ValueError("investigator speech is always labeled control")

    @property
    def parent_id(self) -> str:
        return "{}#{}".format(self.transcript_id, self.index)

    @property
    def record_id(self) -> str:
        if self.provenance.is_original:
            return self.parent_id
        return "{}~p{}:{}".format(self.parent_id,
                                  self.provenance.replaced_position,
                                  self.provenance.synonym_used)

    @property
    def words(self) -> List[str]:
        return [t.surface for t in self.tokens]

    @property
    def text(self) -> str:
        return " ".join(self.words)

    @property
    def has_timestamps(self) -> bool:
        return all(t.has_timestamps for t in self.tokens)

    @property
    def binary_label(self) -> int:
        return self.label.value


class Corpus:
    records: List[SentenceRecord]
    audio_refs: Dict[str, Optional[str]]
    transcripts: Dict[str, Transcript]

    def __init__(self,
                 records: List[SentenceRecord],
                 audio_refs: Dict[str, Optional[str]],
                 transcripts: Optional[Dict[str, Transcript]] = None):
        self.records = records
        self.audio_refs = audio_refs
        self.transcripts = transcripts if transcripts is not None else {}

    def __len__(self):
        return len(self.records)

    def count_by_label(self) -> Dict[Group, int]:
        counts = {Group.CONTROL: 0, Group.DEMENTIA: 0}
        for r in self.records:
            counts[r.label] += 1
        return counts
