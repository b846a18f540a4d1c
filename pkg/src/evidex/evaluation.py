"""Automated scoring of generated findings against references.

Matching is a lexical proxy for expert review: two fields match when their
normalized token overlap clears a threshold or one contains the other.
Per-document alignment uses maximum-cardinality one-to-one matching, because
greedy matching is provably suboptimal once qualification is binary (a
crossing pair can block an otherwise feasible assignment).

Every report embeds the :class:`MatchConfig` that produced it so the numbers
stay interpretable.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import IntEnum
from fractions import Fraction

from .core import Finding, normalize_text

MODES = ("e2e", "triplet")
ORIENTATIONS = ("conventional", "reversed")


class EvalConfigError(ValueError):
    pass


class AlignmentError(ValueError):
    """Reference and generated collections cover different doc ids."""


class UndefinedAgreementError(ValueError):
    """Chance agreement is 1 (a single category everywhere); kappa is undefined."""


class MatchGrade(IntEnum):
    NONE = 0
    TRIPLET_ONLY = 1
    FULL = 2


@dataclass(frozen=True)
class MatchConfig:
    """Thresholds and flags for the lexical matching proxy.

    ``orientation`` controls which side feeds precision: ``conventional``
    scores precision over generated tuples and recall over references;
    ``reversed`` swaps the two (mirroring review sheets that grade the
    reference side for precision).
    """

    tau_field: float = 0.5
    tau_evidence: float = 0.3
    swap_aware: bool = False
    containment_counts: bool = True
    orientation: str = "conventional"

    def __post_init__(self) -> None:
        for name, tau in (("tau_field", self.tau_field), ("tau_evidence", self.tau_evidence)):
            if not 0.0 <= tau <= 1.0:
                raise EvalConfigError(f"{name} must be in [0, 1], got {tau}")
        if self.orientation not in ORIENTATIONS:
            raise EvalConfigError(f"orientation must be one of {ORIENTATIONS}")

    def to_dict(self) -> dict:
        return {
            "tau_field": self.tau_field,
            "tau_evidence": self.tau_evidence,
            "swap_aware": self.swap_aware,
            "containment_counts": self.containment_counts,
            "orientation": self.orientation,
        }


def token_f1(a: str, b: str) -> float:
    """Multiset token F1 over normalized text; both-empty counts as 1.0."""
    ta = normalize_text(a).split()
    tb = normalize_text(b).split()
    if not ta and not tb:
        return 1.0
    overlap = sum((Counter(ta) & Counter(tb)).values())
    return 2.0 * overlap / (len(ta) + len(tb))


def field_match(a: str, b: str, tau: float = 0.5, containment: bool = True) -> bool:
    na = normalize_text(a)
    nb = normalize_text(b)
    if not na and not nb:
        return True
    if containment and na and nb and (na in nb or nb in na):
        return True
    return token_f1(a, b) >= tau


def _swapped(f: Finding) -> Finding:
    return replace(
        f,
        intervention=f.comparator,
        comparator=f.intervention,
        label=f.label.flipped(),
    )


def _grade_direct(ref: Finding, gen: Finding, cfg: MatchConfig) -> MatchGrade:
    triplet = (
        field_match(ref.intervention, gen.intervention, cfg.tau_field, cfg.containment_counts)
        and field_match(ref.outcome, gen.outcome, cfg.tau_field, cfg.containment_counts)
        and field_match(ref.comparator, gen.comparator, cfg.tau_field, cfg.containment_counts)
    )
    if not triplet:
        return MatchGrade.NONE
    if ref.label == gen.label and field_match(
        ref.evidence, gen.evidence, cfg.tau_evidence, cfg.containment_counts
    ):
        return MatchGrade.FULL
    return MatchGrade.TRIPLET_ONLY


def tuple_match(ref: Finding, gen: Finding, cfg: MatchConfig | None = None) -> MatchGrade:
    """Best grade between a reference and a generated finding.

    With ``swap_aware`` on, a generation whose intervention and comparator are
    transposed (with a correspondingly flipped direction label) still
    qualifies; the no-difference label is its own flip.
    """
    cfg = cfg or MatchConfig()
    grade = _grade_direct(ref, gen, cfg)
    if cfg.swap_aware:
        grade = max(grade, _grade_direct(ref, _swapped(gen), cfg))
    return grade


def _max_matching_size(adjacency: Sequence[Sequence[int]], skip_left: set[int], used_right: set[int]) -> int:
    """Kuhn's augmenting-path maximum matching over the remaining vertices."""
    match_right: dict[int, int] = {}

    def augment(i: int, visited: set[int]) -> bool:
        for j in adjacency[i]:
            if j in used_right or j in visited:
                continue
            visited.add(j)
            if j not in match_right or augment(match_right[j], visited):
                match_right[j] = i
                return True
        return False

    size = 0
    for i in range(len(adjacency)):
        if i in skip_left:
            continue
        if augment(i, set()):
            size += 1
    return size


def match_sets(
    refs: Sequence[Finding],
    gens: Sequence[Finding],
    cfg: MatchConfig | None = None,
    mode: str = "e2e",
) -> list[tuple[int, int]]:
    """Maximum-cardinality one-to-one alignment of references to generations.

    Among all maximum matchings, pairs are fixed greedily in ascending
    (ref index, gen index) order, so the result is deterministic.
    """
    cfg = cfg or MatchConfig()
    if mode not in MODES:
        raise EvalConfigError(f"mode must be one of {MODES}")
    floor = MatchGrade.FULL if mode == "e2e" else MatchGrade.TRIPLET_ONLY
    adjacency = [
        [j for j, gen in enumerate(gens) if tuple_match(ref, gen, cfg) >= floor]
        for ref in refs
    ]

    target = _max_matching_size(adjacency, set(), set())
    pairs: list[tuple[int, int]] = []
    fixed_left: set[int] = set()
    used_right: set[int] = set()
    for i in range(len(refs)):
        fixed_left.add(i)
        for j in adjacency[i]:
            if j in used_right:
                continue
            rest = _max_matching_size(adjacency, fixed_left, used_right | {j})
            if len(pairs) + 1 + rest == target:
                pairs.append((i, j))
                used_right.add(j)
                break
    return pairs


@dataclass(frozen=True)
class DocEval:
    doc_id: str
    n_refs: int
    n_gens: int
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class EvalReport:
    mode: str
    precision: float
    recall: float
    f1: float
    n_refs: int
    n_gens: int
    n_matched: int
    matched_pairs: tuple[tuple[str, int, int], ...]
    per_doc: tuple[DocEval, ...]
    config: MatchConfig

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_refs": self.n_refs,
            "n_gens": self.n_gens,
            "n_matched": self.n_matched,
            "config": self.config.to_dict(),
            "per_doc": [
                {
                    "doc_id": d.doc_id,
                    "n_refs": d.n_refs,
                    "n_gens": d.n_gens,
                    "n_matched": len(d.pairs),
                    "pairs": [list(p) for p in d.pairs],
                }
                for d in self.per_doc
            ],
        }


def score_corpus(
    ref_docs: Mapping[str, Sequence[Finding]],
    gen_docs: Mapping[str, Sequence[Finding]],
    cfg: MatchConfig | None = None,
    mode: str = "e2e",
) -> EvalReport:
    """Micro precision/recall/F1 over doc-aligned reference and generated sets.

    Conventions: an entirely empty corpus on both sides is perfect (1/1/1);
    empty generations against existing references score 0/0/0 so abstention
    is never rewarded; recall is vacuously 1.0 when there are no references.
    """
    cfg = cfg or MatchConfig()
    ref_only = sorted(set(ref_docs) - set(gen_docs))
    gen_only = sorted(set(gen_docs) - set(ref_docs))
    if ref_only or gen_only:
        raise AlignmentError(
            f"doc ids not aligned: only in refs {ref_only[:5]}, only in gens {gen_only[:5]}"
        )

    per_doc = []
    matched_pairs = []
    total_refs = total_gens = total_matched = 0
    for doc_id in sorted(ref_docs):
        refs = list(ref_docs[doc_id])
        gens = list(gen_docs[doc_id])
        pairs = match_sets(refs, gens, cfg, mode)
        per_doc.append(DocEval(doc_id, len(refs), len(gens), tuple(pairs)))
        matched_pairs.extend((doc_id, i, j) for i, j in pairs)
        total_refs += len(refs)
        total_gens += len(gens)
        total_matched += len(pairs)

    if total_refs == 0 and total_gens == 0:
        precision = recall = 1.0
    else:
        precision = total_matched / total_gens if total_gens else 0.0
        recall = total_matched / total_refs if total_refs else 1.0
    if cfg.orientation == "reversed":
        precision, recall = recall, precision
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    return EvalReport(
        mode=mode,
        precision=precision,
        recall=recall,
        f1=f1,
        n_refs=total_refs,
        n_gens=total_gens,
        n_matched=total_matched,
        matched_pairs=tuple(matched_pairs),
        per_doc=tuple(per_doc),
        config=cfg,
    )


# --- rater agreement ---------------------------------------------------------


@dataclass(frozen=True)
class RatingMatrix:
    """Items x raters categorical labels; every cell filled, >= 2 raters."""

    categories: tuple[str, ...]
    ratings: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if len(set(self.categories)) != len(self.categories) or not self.categories:
            raise EvalConfigError("categories must be nonempty and distinct")
        if not self.ratings:
            raise EvalConfigError("at least one rated item is required")
        n_raters = len(self.ratings[0])
        if n_raters < 2:
            raise EvalConfigError("at least two raters are required")
        for row in self.ratings:
            if len(row) != n_raters:
                raise EvalConfigError("every item must be rated by the same number of raters")
            for cell in row:
                if cell not in self.categories:
                    raise EvalConfigError(f"rating {cell!r} is not a declared category")

    @property
    def n_raters(self) -> int:
        return len(self.ratings[0])


def fleiss_kappa(matrix: RatingMatrix) -> float:
    """Chance-corrected multi-rater agreement.

    kappa = (P_bar - Pe_bar) / (1 - Pe_bar) with per-item agreement
    P_i = (sum_j n_ij^2 - n) / (n (n - 1)). Computed exactly over rationals;
    unanimous ratings across more than one category give exactly 1.0.
    """
    n = matrix.n_raters
    n_items = len(matrix.ratings)
    category_totals = Counter()
    p_sum = Fraction(0)
    for row in matrix.ratings:
        counts = Counter(row)
        category_totals.update(counts)
        p_sum += Fraction(sum(c * c for c in counts.values()) - n, n * (n - 1))
    p_bar = p_sum / n_items
    pe_bar = sum(
        (Fraction(category_totals[c], n_items * n)) ** 2 for c in matrix.categories
    )
    if pe_bar == 1:
        raise UndefinedAgreementError(
            "all raters used a single category for every item; kappa is undefined"
        )
    return float((p_bar - pe_bar) / (1 - pe_bar))


@dataclass(frozen=True)
class VoteResult:
    labels: tuple[str, ...]
    ties: tuple[bool, ...]
    #: tie-break order, recorded so consumers can interpret tied items
    precedence: tuple[str, ...]


def majority_vote(matrix: RatingMatrix) -> VoteResult:
    """Per-item modal label; ties break by category declaration order and are flagged."""
    labels = []
    ties = []
    for row in matrix.ratings:
        counts = Counter(row)
        best = max(counts.values())
        winners = [c for c in matrix.categories if counts.get(c, 0) == best]
        labels.append(winners[0])
        ties.append(len(winners) > 1)
    return VoteResult(tuple(labels), tuple(ties), matrix.categories)


# --- review sheets -------------------------------------------------------------


@dataclass(frozen=True)
class ReviewQuestion:
    question_id: str
    doc_id: str
    side: str
    question_text: str
    answer: str


REVIEW_SHEET_COLUMNS = ("question_id", "doc_id", "side", "question_text", "answer")

_REF_Q1 = "Does the reference ICO triplet appear in the generated set for this abstract?"
_REF_Q2 = "Can the reference tuple as a whole be derived from the generated set?"
_GEN_Q1 = "Does the generated ICO triplet appear in the abstract?"
_GEN_Q2 = "Is the generated tuple as a whole correct (evidence and direction included)?"


def export_review_sheets(
    ref_docs: Mapping[str, Sequence[Finding]],
    gen_docs: Mapping[str, Sequence[Finding]],
    cfg: MatchConfig | None = None,
) -> list[ReviewQuestion]:
    """Worksheet rows for manual review: two questions per tuple, each side.

    Answers are prefilled with the lexical matcher's judgment against the
    opposite set, as a starting point for a human pass.
    """
    cfg = cfg or MatchConfig()
    ref_only = sorted(set(ref_docs) - set(gen_docs))
    gen_only = sorted(set(gen_docs) - set(ref_docs))
    if ref_only or gen_only:
        raise AlignmentError(
            f"doc ids not aligned: only in refs {ref_only[:5]}, only in gens {gen_only[:5]}"
        )

    def yn(value: bool) -> str:
        return "yes" if value else "no"

    questions = []
    for doc_id in sorted(ref_docs):
        refs = list(ref_docs[doc_id])
        gens = list(gen_docs[doc_id])
        for i, ref in enumerate(refs):
            grades = [tuple_match(ref, gen, cfg) for gen in gens]
            triplet_hit = any(g >= MatchGrade.TRIPLET_ONLY for g in grades)
            full_hit = any(g >= MatchGrade.FULL for g in grades)
            questions.append(
                ReviewQuestion(f"{doc_id}:ref:{i}:q1", doc_id, "reference", _REF_Q1, yn(triplet_hit))
            )
            questions.append(
                ReviewQuestion(f"{doc_id}:ref:{i}:q2", doc_id, "reference", _REF_Q2, yn(full_hit))
            )
        for j, gen in enumerate(gens):
            grades = [tuple_match(ref, gen, cfg) for ref in refs]
            triplet_hit = any(g >= MatchGrade.TRIPLET_ONLY for g in grades)
            full_hit = any(g >= MatchGrade.FULL for g in grades)
            questions.append(
                ReviewQuestion(f"{doc_id}:gen:{j}:q1", doc_id, "generated", _GEN_Q1, yn(triplet_hit))
            )
            questions.append(
                ReviewQuestion(f"{doc_id}:gen:{j}:q2", doc_id, "generated", _GEN_Q2, yn(full_hit))
            )
    return questions
