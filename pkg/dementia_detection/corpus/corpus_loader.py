import csv
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from tqdm import tqdm

from dementia_detection.corpus.chat_model import Corpus, Group, Provenance, SentenceRecord, SpeakerRole, \
    Transcript
from dementia_detection.corpus.chat_parser import parse_file
from dementia_detection.generic_tools.exceptions import CorpusLoadError, DatasetError
from dementia_detection.generic_tools.path_tools import resolve_from_root

logger = logging.getLogger(__name__)

INDEX_FILE_NAME = "index.tsv"
participant_codes = ("PAR",)
investigator_codes = ("INV",)


class IndexEntry:
    transcript_id: str
    group: Group
    transcript_path: str
    audio_path: Optional[str]

    def __init__(self, transcript_id: str, group: Group, transcript_path: str, audio_path: Optional[str]):
        self.transcript_id = transcript_id
        self.group = group
        self.transcript_path = transcript_path
        self.audio_path = audio_path


def label_sentences(transcript: Transcript) -> List[SentenceRecord]:
    """
    One record per utterance: investigators are control whatever the group of the transcript,
    participants carry the group of the transcript.
    """
    if transcript.group is None:
        raise DatasetError("transcript {} has no known group".format(transcript.id))
    records = []
    skipped_speakers: Dict[str, int] = {}
    empty = 0
    for index, utterance in enumerate(transcript.utterances):
        if utterance.speaker in participant_codes:
            role = SpeakerRole.PARTICIPANT
            label = transcript.group
        elif utterance.speaker in investigator_codes:
            role = SpeakerRole.INVESTIGATOR
            label = Group.CONTROL
        else:
            skipped_speakers[utterance.speaker] = skipped_speakers.get(utterance.speaker, 0) + 1
            continue
        if len(utterance.tokens) == 0:
            empty += 1
            continue
        records.append(SentenceRecord(transcript_id=transcript.id,
                                      index=index,
                                      tokens=utterance.tokens,
                                      label=label,
                                      speaker_role=role,
                                      provenance=Provenance.original()))
    if len(skipped_speakers) > 0:
        logger.warning("transcript %s: skipped utterances of speakers %s", transcript.id, skipped_speakers)
    if empty > 0:
        logger.debug("transcript %s: %d utterances without words", transcript.id, empty)
    return records


def read_index(index_path: str) -> List[IndexEntry]:
    if not os.path.exists(index_path):
        raise CorpusLoadError("missing corpus index", [index_path])
    entries = []
    malformed = []
    with open(index_path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if len(line.strip()) == 0 or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 3:
                malformed.append("line {}".format(line_number))
                continue
            try:
                group = Group.from_string(fields[1])
            except ValueError:
                malformed.append("line {}".format(line_number))
                continue
            audio = fields[3].strip() if len(fields) > 3 and fields[3].strip() not in {"", "-"} else None
            entries.append(IndexEntry(transcript_id=fields[0].strip(), group=group,
                                      transcript_path=fields[2].strip(), audio_path=audio))
    if len(malformed) > 0:
        raise CorpusLoadError("malformed index entries in {}".format(index_path), malformed)
    return entries


def find_transcript_files(root: str) -> List[str]:
    found = []
    for directory, _, files in os.walk(root):
        for f in files:
            if f.endswith(".cha"):
                found.append(os.path.normpath(os.path.join(directory, f)))
    return sorted(found)


def load_corpus(root: str, index_file: str = INDEX_FILE_NAME, verbose: bool = False) -> Corpus:
    """
    Parse every transcript listed in the index of a corpus directory.

    The index has one tab separated line per transcript: id, group (dementia|control), transcript path and
    audio feature directory (holding <utterance index>.aemb files), paths relative to the root.
    """
    entries = read_index(os.path.join(root, index_file))
    indexed_paths = {resolve_from_root(root, e.transcript_path) for e in entries}
    not_indexed = [p for p in find_transcript_files(root) if p not in indexed_paths]
    if len(not_indexed) > 0:
        raise CorpusLoadError("transcripts without index entry", not_indexed)
    missing = [resolve_from_root(root, e.transcript_path) for e in entries
               if not os.path.exists(resolve_from_root(root, e.transcript_path))]
    dangling = [resolve_from_root(root, e.audio_path) for e in entries
                if e.audio_path is not None and not os.path.exists(resolve_from_root(root, e.audio_path))]
    if len(missing) > 0:
        raise CorpusLoadError("index references absent transcript files", missing)
    if len(dangling) > 0:
        raise CorpusLoadError("index references absent audio features", dangling)
    ids = [e.transcript_id for e in entries]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if len(duplicates) > 0:
        raise CorpusLoadError("duplicate transcript ids in index", duplicates)
    records: List[SentenceRecord] = []
    audio_refs: Dict[str, Optional[str]] = {}
    transcripts: Dict[str, Transcript] = {}
    for entry in tqdm(sorted(entries, key=lambda e: e.transcript_id), disable=not verbose,
                      desc="transcripts"):
        transcript = parse_file(resolve_from_root(root, entry.transcript_path),
                                transcript_id=entry.transcript_id,
                                group=entry.group)
        transcripts[entry.transcript_id] = transcript
        audio_refs[entry.transcript_id] = resolve_from_root(root, entry.audio_path) \
            if entry.audio_path is not None else None
        records.extend(label_sentences(transcript))
    corpus = Corpus(records=records, audio_refs=audio_refs, transcripts=transcripts)
    counts = corpus.count_by_label()
    logger.info("loaded %d transcripts, %d sentences: %d dementia, %d control",
                len(transcripts), len(records), counts[Group.DEMENTIA], counts[Group.CONTROL])
    return corpus


def summary_rows(records: Iterable[SentenceRecord]) -> List[Tuple[str, str, int]]:
    counts: Dict[Tuple[str, str], int] = {}
    for r in records:
        key = (r.label.to_string(), r.speaker_role.name.lower())
        counts[key] = counts.get(key, 0) + 1
    return [(k[0], k[1], counts[k]) for k in sorted(counts)]


def write_corpus_summary(records: Sequence[SentenceRecord], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "speaker_role", "count"])
        for row in summary_rows(records):
            writer.writerow(row)
