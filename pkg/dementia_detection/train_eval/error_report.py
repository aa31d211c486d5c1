"""
Misclassification listing: one row per wrongly classified sentence, tagged false_positive or false_negative.
A misclassified augmented sentence whose parent is in the same split and correctly classified brings the
parent along as a parent_context row.
"""
import csv
from typing import Dict, List, Sequence

import numpy as np

from dementia_detection.corpus.chat_model import SentenceRecord
from dementia_detection.embeddings.embedding_utils import FeatureStore
from dementia_detection.models.model_graph import ModelGraph
from dementia_detection.train_eval.trainer import predict_probabilities

ERROR_REPORT_HEADER = ["record_id", "parent_id", "text", "true_label", "probability", "tag", "provenance",
                       "parent_text", "replaced_word", "synonym", "token_count"]


def error_tag(label: int, predicted: int) -> str:
    if label == predicted:
        return ""
    return "false_positive" if predicted == 1 else "false_negative"


def _row(record: SentenceRecord, probability: float, tag: str,
         originals: Dict[str, SentenceRecord]) -> List[str]:
    parent_text, replaced_word, synonym = "", "", ""
    if not record.provenance.is_original:
        parent = originals.get(record.parent_id)
        synonym = record.provenance.synonym_used
        if parent is not None:
            parent_text = parent.text
            replaced_word = parent.tokens[record.provenance.replaced_position].surface
    return [record.record_id, record.parent_id, record.text, record.label.to_string(), repr(float(probability)),
            tag, "original" if record.provenance.is_original else "augmented", parent_text, replaced_word,
            synonym, str(len(record.tokens))]


def error_rows(records: Sequence[SentenceRecord], probs: Sequence[float], threshold: float = 0.5) -> List[List[str]]:
    probs = np.asarray(probs, dtype=np.float64)
    position = {r.record_id: i for i, r in enumerate(records)}
    originals = {r.parent_id: r for r in records if r.provenance.is_original}
    rows = []
    listed = set()
    for i, r in enumerate(records):
        tag = error_tag(r.binary_label, int(probs[i] >= threshold))
        if tag == "":
            continue
        rows.append(_row(r, probs[i], tag, originals))
        listed.add(r.record_id)
        parent = originals.get(r.parent_id) if not r.provenance.is_original else None
        if parent is None or parent.record_id in listed:
            continue
        j = position[parent.record_id]
        if error_tag(parent.binary_label, int(probs[j] >= threshold)) == "":
            rows.append(_row(parent, probs[j], "parent_context", originals))
            listed.add(parent.record_id)
    return rows


def error_report(graph: ModelGraph, records: Sequence[SentenceRecord], store: FeatureStore,
                 threshold: float = 0.5, batch_size: int = 16) -> List[List[str]]:
    return error_rows(records, predict_probabilities(graph, records, store, batch_size), threshold)


def write_error_report(rows: Sequence[Sequence[str]], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(ERROR_REPORT_HEADER)
        writer.writerows(rows)
