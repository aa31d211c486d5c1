"""
Reader and writer for CHAT transcripts (the TalkBank markup used by DementiaBank).

@-lines are headers, *-lines speaker tiers, %-lines dependent tiers (ignored). A line starting with a
tab continues the previous one. Word timings come as bullets 0x15START_END0x15 (milliseconds): a bullet
covers the words written since the previous bullet; when it covers k > 1 words its interval is cut into
k equal parts, left to right, and the tokens are flagged as interpolated.
"""
import logging
import os
import re
from typing import Dict, List, Optional, Tuple

from dementia_detection.corpus.chat_model import Group, Token, Transcript, Utterance
from dementia_detection.generic_tools.exceptions import ChatParseError

logger = logging.getLogger(__name__)

BULLET = "\x15"
bullet_regex = re.compile(BULLET + "([^" + BULLET + "]*)" + BULLET)
bullet_bounds_regex = re.compile(r"^(\d+)_(\d+)$")
tier_regex = re.compile(r"^\*([^:\s]*):[ \t]?(.*)$")
speaker_code_regex = re.compile(r"^[A-Z0-9]+$")
retrace_code = r"\[(?:/{1,3}|/-)\]"
retraced_group_regex = re.compile(r"<[^<>]*>\s*" + retrace_code)
retraced_word_regex = re.compile(r"(?<!\S)[^\s\[\]<>]+\s*" + retrace_code)
bracket_code_regex = re.compile(r"\[[^\]]*\]")
pause_regex = re.compile(r"\((?:\.+|(?:\d+:)?\d+(?:\.\d*)?)\)")
dropped_words = {"www"}
edge_punctuation = ".,?!;\"“”„‡"

# diagnosis field of the participant @ID line
control_diagnoses = {"control"}


def decode_chat_bytes(raw: bytes) -> str:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line_number = raw[:e.start].count(b"\n") + 1
        raise ChatParseError(line_number, "invalid UTF-8 byte at offset {}".format(e.start))
    if text.startswith("\ufeff"):
        text = text[1:]
    return text


def logical_lines(text: str) -> List[Tuple[int, str]]:
    lines = []
    for i, line in enumerate(text.splitlines()):
        line_number = i + 1
        if line.startswith("\t") and len(lines) > 0:
            start, previous = lines[-1]
            lines[-1] = (start, previous + " " + line.strip())
        else:
            lines.append((line_number, line.rstrip("\r")))
    return lines


def clean_word(word: str) -> Optional[str]:
    if word.startswith("&=") or word.startswith("&+") or word.startswith("&*"):
        return None
    if word.startswith("&-"):
        word = word[2:]
    elif word.startswith("&"):
        word = word[1:]
    if len(word) > 1 and word[0] == "0" and word[1].isalpha():
        # omitted word
        return None
    if word.startswith("+"):
        return None
    word = word.split("@")[0]
    for c in "()^:↑↓≠":
        word = word.replace(c, "")
    word = word.strip(edge_punctuation).lower()
    if len(word) == 0 or word in dropped_words:
        return None
    if not any(c.isalnum() for c in word):
        return None
    return word


def clean_segment(segment: str) -> List[str]:
    """Words of a stretch of tier text with CHAT markup removed."""
    s = retraced_group_regex.sub(" ", segment)
    s = retraced_word_regex.sub(" ", s)
    s = bracket_code_regex.sub(" ", s)
    s = s.replace("<", " ").replace(">", " ")
    s = pause_regex.sub(" ", s)
    words = []
    for w in s.split():
        c = clean_word(w)
        if c is not None:
            words.append(c)
    return words


def split_interval(start_ms: int, end_ms: int, k: int) -> List[Tuple[int, int]]:
    bounds = [start_ms + (end_ms - start_ms) * j // k for j in range(k + 1)]
    return [(bounds[j], bounds[j + 1]) for j in range(k)]


def parse_tier_tokens(body: str, line_number: int) -> List[Token]:
    if body.count(BULLET) % 2 != 0:
        raise ChatParseError(line_number, "unterminated timestamp bullet")
    pieces = bullet_regex.split(body)
    # pieces alternate: text, bullet content, text, ...
    tokens: List[Token] = []
    for j in range(0, len(pieces), 2):
        words = clean_segment(pieces[j])
        if j + 1 < len(pieces):
            m = bullet_bounds_regex.match(pieces[j + 1].strip())
            if m is None:
                raise ChatParseError(line_number,
                                     "timestamp bullet with non-numeric bounds '{}'".format(pieces[j + 1]))
            start_ms, end_ms = int(m.group(1)), int(m.group(2))
            if start_ms > end_ms:
                raise ChatParseError(line_number,
                                     "timestamp bullet starts after it ends ({}_{})".format(start_ms, end_ms))
            if len(words) == 0:
                continue
            intervals = split_interval(start_ms, end_ms, len(words))
            for w, (s, e) in zip(words, intervals):
                tokens.append(Token(surface=w, start_ms=s, end_ms=e, interpolated=len(words) > 1))
        else:
            tokens.extend(Token(surface=w) for w in words)
    previous_start = None
    for t in tokens:
        if t.start_ms is None:
            continue
        if previous_start is not None and t.start_ms < previous_start:
            raise ChatParseError(line_number, "word timestamps go backwards")
        previous_start = t.start_ms
    return tokens


def group_from_header(header_meta: Dict[str, str]) -> Optional[Group]:
    for id_line in header_meta.get("ID", "").split("\n"):
        fields = id_line.split("|")
        if len(fields) < 6 or fields[2].strip() != "PAR":
            continue
        diagnosis = fields[5].strip().lower()
        if diagnosis == "":
            continue
        if diagnosis in control_diagnoses:
            return Group.CONTROL
        return Group.DEMENTIA
    return None


def parse_transcript(raw: bytes,
                     transcript_id: str = "",
                     group: Optional[Group] = None) -> Transcript:
    """
    :param raw: content of a .cha file
    :param transcript_id: identifier given to the transcript (file stem by default in parse_file)
    :param group: group known from the corpus index, wins over the @ID header
    :return: the Transcript, one Utterance per *-tier
    """
    text = decode_chat_bytes(raw)
    header_meta: Dict[str, str] = {}
    utterances: List[Utterance] = []
    begun = False
    ended = False
    for line_number, line in logical_lines(text):
        if len(line.strip()) == 0 or ended:
            continue
        if line.startswith("@"):
            key, _, value = line[1:].partition(":")
            key = key.strip()
            value = value.strip()
            if key == "Begin":
                begun = True
            elif key == "End":
                ended = True
            if key in header_meta and value != "":
                header_meta[key] = header_meta[key] + "\n" + value
            elif key not in header_meta:
                header_meta[key] = value
            continue
        if not begun:
            raise ChatParseError(line_number, "malformed header, missing @Begin")
        if line.startswith("%"):
            continue
        if line.startswith("*"):
            m = tier_regex.match(line)
            if m is None or speaker_code_regex.match(m.group(1)) is None:
                raise ChatParseError(line_number, "tier line with no speaker code")
            body = m.group(2)
            tokens = parse_tier_tokens(body, line_number)
            utterances.append(Utterance(speaker=m.group(1), tokens=tuple(tokens), raw=body))
            continue
        raise ChatParseError(line_number, "unrecognized line '{}'".format(line[:20]))
    if not begun:
        raise ChatParseError(1, "malformed header, missing @Begin")
    header_group = group_from_header(header_meta)
    if group is None:
        group = header_group
    elif header_group is not None and header_group != group:
        logger.warning("transcript %s: header says %s, index says %s; keeping the index",
                       transcript_id, header_group.to_string(), group.to_string())
    return Transcript(id=transcript_id, group=group, utterances=utterances, header_meta=header_meta)


def parse_file(file_path: str,
               transcript_id: Optional[str] = None,
               group: Optional[Group] = None) -> Transcript:
    if transcript_id is None:
        transcript_id = os.path.splitext(os.path.basename(file_path))[0]
    with open(file_path, "rb") as f:
        raw = f.read()
    return parse_transcript(raw, transcript_id=transcript_id, group=group)


def serialize_transcript(transcript: Transcript) -> str:
    lines = ["@UTF8", "@Begin"]
    for key, value in transcript.header_meta.items():
        if key in {"UTF8", "Begin", "End"}:
            continue
        if value == "":
            lines.append("@" + key)
            continue
        for v in value.split("\n"):
            lines.append("@{}:\t{}".format(key, v))
    for u in transcript.utterances:
        words = []
        for t in u.tokens:
            if t.has_timestamps:
                words.append("{} {}{}_{}{}".format(t.surface, BULLET, t.start_ms, t.end_ms, BULLET))
            else:
                words.append(t.surface)
        lines.append("*{}:\t{} .".format(u.speaker, " ".join(words)))
    lines.append("@End")
    return "\n".join(lines) + "\n"
