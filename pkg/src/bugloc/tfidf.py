"""Sparse TF.IDF vectors and the length-weighted cosine ranking score.

Vocabularies are always built from source-file token streams; bug-report
terms missing from the vocabulary carry no weight and are dropped at
vectorization time. Term weights are ``(ln f + 1) * ln(#docs / n_t)`` with
natural logs throughout (the base cancels in every ratio the ranker uses).

The ranking score multiplies the cosine of two weight vectors by a logistic
factor of the candidate file's normalized length, so that larger files get
a bounded boost:

    score = 1 / (1 + exp(-N(#terms))) * cos(w_bug, w_file)

``N`` is min-max normalization of raw term counts over the file corpus
being ranked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Benchmark
from .preprocess import TokenStream


@dataclass
class Vocabulary:
    """Term ids plus the document-frequency model behind IDF weights."""

    term_ids: dict[str, int]
    doc_freq: list[int]
    total_documents: int
    scope: str = "local"
    held_out: str | None = None

    def __post_init__(self):
        if self.total_documents < 1:
            raise ValueError("vocabulary needs at least one counted document")
        for df in self.doc_freq:
            if not 1 <= df <= self.total_documents:
                raise ValueError(f"document frequency {df} outside [1, {self.total_documents}]")

    def __len__(self) -> int:
        return len(self.term_ids)

    def __contains__(self, term: str) -> bool:
        return term in self.term_ids

    def idf(self, term_id: int) -> float:
        return math.log(self.total_documents / self.doc_freq[term_id])


@dataclass
class TfIdfVector:
    """Sparse term_id -> weight map for one document.

    ``term_count`` is the raw stream length before out-of-vocabulary terms
    were dropped; the length normalizer works on raw counts.
    """

    weights: dict[int, float]
    source_doc_id: str | None = None
    term_count: int = 0

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))


@dataclass(frozen=True)
class LengthNormalizer:
    """Min-max scaler over the raw term counts of the corpus being ranked."""

    min_terms: int
    max_terms: int

    def __post_init__(self):
        if self.min_terms > self.max_terms:
            raise ValueError("min_terms must not exceed max_terms")

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "LengthNormalizer":
        counts = list(counts)
        if not counts:
            raise ValueError("cannot build a length normalizer from no documents")
        return cls(min_terms=min(counts), max_terms=max(counts))

    def normalize(self, term_count: int) -> float:
        if self.max_terms == self.min_terms:
            return 0.5
        x = (term_count - self.min_terms) / (self.max_terms - self.min_terms)
        return min(1.0, max(0.0, x))


def build_vocabulary(documents: Iterable[TokenStream], scope: str = "local") -> Vocabulary:
    """Vocabulary and document frequencies over source-file streams.

    Every document counts toward ``total_documents`` even when empty.
    """
    documents = list(documents)
    if not documents:
        raise ValueError("cannot build a vocabulary from an empty document collection")
    df: dict[str, int] = {}
    for doc in documents:
        for term in set(doc.tokens):
            df[term] = df.get(term, 0) + 1
    terms = sorted(df)
    return Vocabulary(
        term_ids={t: i for i, t in enumerate(terms)},
        doc_freq=[df[t] for t in terms],
        total_documents=len(documents),
        scope=scope,
    )


def build_global_idf(benchmark: Benchmark, held_out: str,
                     count_held_out: bool = False) -> Vocabulary:
    """Global vocabulary with leakage-safe document frequencies.

    Terms come from the source files of *every* project, the held-out one
    included; frequency counts and the document total exclude the held-out
    project's files. Terms seen only there keep a frequency floor of 1 so
    their weight stays defined. ``count_held_out`` switches to counting
    the whole benchmark instead (no exclusion).
    """
    held_project = benchmark.project(held_out)  # raises on unknown name
    counted_docs = 0
    df: dict[str, int] = {}
    vocab_terms: set[str] = set()
    for project in benchmark.projects:
        for src in project.source_files:
            if src.token_stream is None:
                raise ValueError(f"{project.name}/{src.id}: token stream missing; preprocess first")
            vocab_terms.update(src.token_stream.tokens)
            if project.name == held_project.name and not count_held_out:
                continue
            counted_docs += 1
            for term in set(src.token_stream.tokens):
                df[term] = df.get(term, 0) + 1
    if counted_docs == 0:
        raise ValueError("no documents left to count after holding out " + held_out)
    terms = sorted(vocab_terms)
    return Vocabulary(
        term_ids={t: i for i, t in enumerate(terms)},
        doc_freq=[max(1, df.get(t, 0)) for t in terms],
        total_documents=counted_docs,
        scope="global",
        held_out=held_out,
    )


def vectorize(stream: TokenStream, vocab: Vocabulary,
              source_doc_id: str | None = None) -> TfIdfVector:
    """TF.IDF weights for one stream; out-of-vocabulary terms are dropped."""
    counts: dict[int, int] = {}
    for term in stream.tokens:
        term_id = vocab.term_ids.get(term)
        if term_id is not None:
            counts[term_id] = counts.get(term_id, 0) + 1
    weights = {tid: (math.log(f) + 1.0) * vocab.idf(tid) for tid, f in counts.items()}
    return TfIdfVector(weights=weights, source_doc_id=source_doc_id,
                       term_count=len(stream.tokens))


def cosine(u: TfIdfVector, v: TfIdfVector) -> float:
    """Cosine similarity of sparse vectors; 0 when either norm is zero.

    The shared terms are summed in sorted id order so the result is
    bit-identical under argument swap.
    """
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if len(u.weights) > len(v.weights):
        u, v = v, u
    shared = sorted(tid for tid in u.weights if tid in v.weights)
    dot = sum(u.weights[tid] * v.weights[tid] for tid in shared)
    return dot / (nu * nv)


def rvsm(bug: TfIdfVector, file: TfIdfVector, norm: LengthNormalizer) -> float:
    """Length-weighted cosine score of a bug report against one file."""
    logistic = 1.0 / (1.0 + math.exp(-norm.normalize(file.term_count)))
    return logistic * cosine(bug, file)


_FORMAT_HEADER = "bugloc-idf v1"


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Write the IDF model as a line-oriented text file."""
    lines = [
        _FORMAT_HEADER,
        f"docs\t{vocab.total_documents}",
        f"scope\t{vocab.scope}",
        f"held_out\t{vocab.held_out or ''}",
    ]
    for term in sorted(vocab.term_ids):
        lines.append(f"{term}\t{vocab.doc_freq[vocab.term_ids[term]]}")
    Path(path).write_text("\n".join(lines) + "\n", "utf-8")


def load_vocabulary(path) -> Vocabulary:
    lines = Path(path).read_text("utf-8").splitlines()
    if not lines or lines[0] != _FORMAT_HEADER:
        raise ValueError(f"{path}: not a {_FORMAT_HEADER} file")
    header = dict(line.split("\t", 1) for line in lines[1:4])
    term_ids, doc_freq = {}, []
    for line in lines[4:]:
        if not line:
            continue
        term, df = line.rsplit("\t", 1)
        term_ids[term] = len(doc_freq)
        doc_freq.append(int(df))
    return Vocabulary(
        term_ids=term_ids,
        doc_freq=doc_freq,
        total_documents=int(header["docs"]),
        scope=header["scope"],
        held_out=header["held_out"] or None,
    )
