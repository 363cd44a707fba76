"""Pair scoring, top-down bootstrapping expansion, and evaluation metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyInputError, ParseError, VteError
from .fusion import detect, represent_pair
from .taxonomy import Taxonomy


@dataclass
class Candidate:
    """One candidate hypernymy pair, as read from a candidates TSV row."""

    hyper: str
    hypo: str
    image_key: str | None = None
    label: int | None = None


@dataclass
class PredictionRecord:
    hyper: str
    hypo: str
    probability: float
    decision: int
    gold: int | None = None

    def to_json(self) -> str:
        rec = {"hyper": self.hyper, "hypo": self.hypo,
               "probability": self.probability, "decision": self.decision}
        if self.gold is not None:
            rec["gold"] = self.gold
        return json.dumps(rec, ensure_ascii=False)


@dataclass
class MetricsReport:
    """Binary-classification metrics, each in [0, 1]."""

    accuracy: float
    precision: float
    recall: float
    f1: float

    def as_percentages(self) -> dict:
        return {name: round(getattr(self, name) * 100.0, 2)
                for name in ("accuracy", "precision", "recall", "f1")}

    def to_json(self) -> str:
        return ("{" + ", ".join(
            f'"{name}": {getattr(self, name) * 100.0:.2f}'
            for name in ("accuracy", "precision", "recall", "f1")
        ) + "}")


def score_pair(model, hyper: str, hypo: str, table, image_key: str | None = None,
               gold: int | None = None) -> PredictionRecord:
    """Fuse and classify one pair; the decision is strict: probability must
    exceed the model threshold."""
    fused = represent_pair(model, hyper, hypo, table, image_key=image_key)
    _, prob = detect(fused.c_e, fused.c_o, model.detector)
    decision = int(prob > model.detector.threshold)
    return PredictionRecord(hyper=hyper, hypo=hypo, probability=prob,
                            decision=decision, gold=gold)


@dataclass
class ExpansionResult:
    taxonomy: Taxonomy
    accepted: list
    records: list
    skipped: list       # (candidate, reason) pairs that could not be applied
    unprocessed: list   # candidates whose hypernym never appeared in a level


def expand(model, taxonomy: Taxonomy, candidates, table, score_fn=None) -> ExpansionResult:
    """Grow the taxonomy top-down, level by level.

    At level i every node's pending candidates are scored; accepted hyponyms
    are attached immediately, join level i+1, and may themselves act as
    hypernyms for deeper candidates (the bootstrapping). Acceptances that
    would close a cycle are skipped and logged. Each candidate is scored at
    most once. The input taxonomy is not mutated.
    """
    if score_fn is None:
        def score_fn(cand: Candidate) -> PredictionRecord:
            return score_pair(model, cand.hyper, cand.hypo, table,
                              image_key=cand.image_key, gold=cand.label)

    grown = taxonomy.copy()
    pending: dict[str, list[Candidate]] = {}
    for cand in candidates:
        pending.setdefault(cand.hyper, []).append(cand)

    accepted: list[tuple[str, str]] = []
    records: list[PredictionRecord] = []
    skipped: list[tuple[Candidate, str]] = []

    level = 0
    while True:
        levels = grown.level_order_levels()
        if level >= len(levels):
            break
        for node in levels[level]:
            for cand in pending.pop(node, []):
                try:
                    record = score_fn(cand)
                except VteError as exc:
                    skipped.append((cand, str(exc)))
                    continue
                records.append(record)
                if record.decision != 1:
                    continue
                try:
                    grown.add_edge(cand.hyper, cand.hypo)
                except VteError as exc:
                    skipped.append((cand, str(exc)))
                    continue
                accepted.append((cand.hyper, cand.hypo))
        level += 1

    unprocessed = [cand for bucket in pending.values() for cand in bucket]
    return ExpansionResult(taxonomy=grown, accepted=accepted, records=records,
                           skipped=skipped, unprocessed=unprocessed)


def evaluate(records) -> MetricsReport:
    """Confusion-matrix metrics over records that carry gold labels."""
    labeled = [r for r in records if r.gold is not None]
    if not labeled:
        raise EmptyInputError("no labeled predictions to evaluate")
    tp = sum(1 for r in labeled if r.decision == 1 and r.gold == 1)
    fp = sum(1 for r in labeled if r.decision == 1 and r.gold == 0)
    fn = sum(1 for r in labeled if r.decision == 0 and r.gold == 1)
    tn = sum(1 for r in labeled if r.decision == 0 and r.gold == 0)
    accuracy = (tp + tn) / len(labeled)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsReport(accuracy=accuracy, precision=precision, recall=recall, f1=f1)


# --- file formats ------------------------------------------------------------


def load_candidates(path) -> list[Candidate]:
    """Read `hypernym<TAB>hyponym[<TAB>image-key[<TAB>label]]` rows.

    Empty image-key fields mean no image; labels must be 0 or 1 when present.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or len(parts) > 4 or not parts[0] or not parts[1]:
                raise ParseError(f"expected 2-4 tab-separated fields, got {line!r}",
                                 line=lineno)
            image_key = parts[2] if len(parts) > 2 and parts[2] else None
            label = None
            if len(parts) > 3 and parts[3]:
                if parts[3] not in ("0", "1"):
                    raise ParseError(f"label must be 0 or 1, got {parts[3]!r}", line=lineno)
                label = int(parts[3])
            out.append(Candidate(hyper=parts[0], hypo=parts[1],
                                 image_key=image_key, label=label))
    return out


def save_candidates(candidates, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for cand in candidates:
            image = cand.image_key if cand.image_key is not None else ""
            label = "" if cand.label is None else str(cand.label)
            fh.write(f"{cand.hyper}\t{cand.hypo}\t{image}\t{label}\n")


def save_predictions(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def load_predictions(path) -> list[PredictionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            out.append(PredictionRecord(
                hyper=rec["hyper"], hypo=rec["hypo"],
                probability=float(rec["probability"]),
                decision=int(rec["decision"]),
                gold=int(rec["gold"]) if "gold" in rec else None,
            ))
    return out


def save_metrics(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
