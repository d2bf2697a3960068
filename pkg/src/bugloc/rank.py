"""Direct and indirect relevancy scoring and the seven ranking methods.

Direct relevancy compares the query report against every source file;
indirect relevancy compares it against historical bug reports and bridges
their similarity to the files each one fixed:

    indirect(f) = sum over history reports B fixing f of sim(query, B) / |fixed(B)|

Both score maps are min-max normalized per query and fused with a weighted
average (default 0.8 direct / 0.2 indirect). The method table:

    1  local TF.IDF, direct only          5  global doc vectors, direct only
    2  global TF.IDF, direct only         6  global TF.IDF + doc-vector history
    3  local TF.IDF, both functions       7  TF.IDF and doc vectors combined
    4  global TF.IDF, both functions         on both functions

Combined scoring (method 7) normalizes the TF.IDF and doc-vector maps to
[0, 1] separately and averages them per relevancy function.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from . import embedding, tfidf
from .corpus import BugReport, Project

TFIDF_LOCAL = "tfidf_local"
TFIDF_GLOBAL = "tfidf_global"
DOC2VEC_GLOBAL = "doc2vec_global"
COMBINED_GLOBAL = "tfidf_global+doc2vec_global"
NONE = "none"

_METHOD_TABLE = {
    1: (TFIDF_LOCAL, NONE, 1.0, 0.0),
    2: (TFIDF_GLOBAL, NONE, 1.0, 0.0),
    3: (TFIDF_LOCAL, TFIDF_LOCAL, 0.8, 0.2),
    4: (TFIDF_GLOBAL, TFIDF_GLOBAL, 0.8, 0.2),
    5: (DOC2VEC_GLOBAL, NONE, 1.0, 0.0),
    6: (TFIDF_GLOBAL, DOC2VEC_GLOBAL, 0.8, 0.2),
    7: (COMBINED_GLOBAL, COMBINED_GLOBAL, 0.8, 0.2),
}


@dataclass(frozen=True)
class MethodConfig:
    method_id: int
    direct_model: str
    indirect_model: str
    w1: float = 0.8
    w2: float = 0.2

    def __post_init__(self):
        if abs(self.w1 + self.w2 - 1.0) > 1e-9:
            raise ValueError("fusion weights must sum to 1")

    @classmethod
    def from_id(cls, method_id: int, w1: float | None = None) -> "MethodConfig":
        if method_id not in _METHOD_TABLE:
            raise ValueError(f"unknown method id {method_id} (valid: 1..7)")
        direct, indirect, default_w1, default_w2 = _METHOD_TABLE[method_id]
        if w1 is not None and indirect != NONE:
            return cls(method_id, direct, indirect, w1, 1.0 - w1)
        return cls(method_id, direct, indirect, default_w1, default_w2)

    @property
    def needs_global_tfidf(self) -> bool:
        return TFIDF_GLOBAL in (self.direct_model, self.indirect_model) or \
            COMBINED_GLOBAL in (self.direct_model, self.indirect_model)

    @property
    def needs_embeddings(self) -> bool:
        return any(m in (DOC2VEC_GLOBAL, COMBINED_GLOBAL)
                   for m in (self.direct_model, self.indirect_model))


@dataclass
class RankEntry:
    file_id: str
    final_score: float
    direct_score: float
    indirect_score: float


@dataclass
class RankedList:
    query_bug_id: str
    entries: list[RankEntry]
    method_id: int

    def rank_of(self, file_id: str) -> int:
        """1-based rank; raises if the file is absent."""
        for i, entry in enumerate(self.entries, start=1):
            if entry.file_id == file_id:
                return i
        raise KeyError(file_id)

    @property
    def file_ids(self) -> list[str]:
        return [e.file_id for e in self.entries]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.dump_csv(fh)

    def dump_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bug_id", "rank", "file_path", "final", "direct", "indirect"])
        for rank, e in enumerate(self.entries, start=1):
            writer.writerow([self.query_bug_id, rank, e.file_id,
                             f"{e.final_score:.10g}", f"{e.direct_score:.10g}",
                             f"{e.indirect_score:.10g}"])


class Artifacts:
    """Models and per-project caches a localization run draws on.

    Local TF.IDF state is derived lazily from the project itself; global
    models (IDF vocabulary, paragraph-vector pair) must be supplied when a
    method asks for them. File vectors, report vectors and inferred doc
    vectors are computed once and reused across queries.
    """

    def __init__(self, project: Project, global_vocab: tfidf.Vocabulary | None = None,
                 dm_model: embedding.EmbeddingModel | None = None,
                 dbow_model: embedding.EmbeddingModel | None = None,
                 infer_epochs: int | None = None):
        self.project = project
        self.global_vocab = global_vocab
        self.dm_model = dm_model
        self.dbow_model = dbow_model
        self.infer_epochs = infer_epochs
        self._local_vocab: tfidf.Vocabulary | None = None
        self._normalizer: tfidf.LengthNormalizer | None = None
        self._file_vectors: dict[str, dict[str, tfidf.TfIdfVector]] = {}
        self._report_vectors: dict[tuple[str, str], tfidf.TfIdfVector] = {}
        self._file_doc_vectors: dict[str, embedding.DocVector] | None = None
        self._report_doc_vectors: dict[str, embedding.DocVector] = {}
        for src in project.source_files:
            if src.token_stream is None:
                raise ValueError(f"{src.id}: token stream missing; preprocess first")

    @property
    def local_vocab(self) -> tfidf.Vocabulary:
        if self._local_vocab is None:
            self._local_vocab = tfidf.build_vocabulary(
                [f.token_stream for f in self.project.source_files], scope="local")
        return self._local_vocab

    @property
    def normalizer(self) -> tfidf.LengthNormalizer:
        if self._normalizer is None:
            self._normalizer = tfidf.LengthNormalizer.from_counts(
                len(f.token_stream) for f in self.project.source_files)
        return self._normalizer

    def vocab(self, scope: str) -> tfidf.Vocabulary:
        if scope == "local":
            return self.local_vocab
        if self.global_vocab is None:
            raise ValueError("global IDF model required but not provided")
        return self.global_vocab

    def file_vectors(self, scope: str) -> dict[str, tfidf.TfIdfVector]:
        if scope not in self._file_vectors:
            vocab = self.vocab(scope)
            self._file_vectors[scope] = {
                f.id: tfidf.vectorize(f.token_stream, vocab, source_doc_id=f.id)
                for f in self.project.source_files}
        return self._file_vectors[scope]

    def report_vector(self, report: BugReport, scope: str) -> tfidf.TfIdfVector:
        key = (report.id, scope)
        if key not in self._report_vectors:
            self._report_vectors[key] = tfidf.vectorize(
                report.token_stream, self.vocab(scope), source_doc_id=report.id)
        return self._report_vectors[key]

    def _require_models(self):
        if self.dm_model is None or self.dbow_model is None:
            raise ValueError("paragraph-vector models required but not provided")

    def file_doc_vectors(self) -> dict[str, embedding.DocVector]:
        if self._file_doc_vectors is None:
            self._require_models()
            self._file_doc_vectors = {
                f.id: embedding.combined_vector(f.token_stream, self.dm_model,
                                                self.dbow_model, epochs=self.infer_epochs)
                for f in self.project.source_files}
        return self._file_doc_vectors

    def report_doc_vector(self, report: BugReport) -> embedding.DocVector:
        if report.id not in self._report_doc_vectors:
            self._require_models()
            self._report_doc_vectors[report.id] = embedding.combined_vector(
                report.token_stream, self.dm_model, self.dbow_model,
                epochs=self.infer_epochs)
        return self._report_doc_vectors[report.id]


def _minmax(scores: dict[str, float]) -> dict[str, float]:
    # Constant maps (including all-zero) normalize to zero so they cannot
    # perturb the fused ranking.
    lo, hi = min(scores.values()), max(scores.values())
    if hi == lo:
        return {k: 0.0 for k in scores}
    return {k: (v - lo) / (hi - lo) for k, v in scores.items()}


def _tfidf_direct(query: BugReport, artifacts: Artifacts, scope: str) -> dict[str, float]:
    bug_vec = artifacts.report_vector(query, scope)
    norm = artifacts.normalizer
    vectors = artifacts.file_vectors(scope)
    return {fid: tfidf.rvsm(bug_vec, vec, norm) for fid, vec in vectors.items()}


def _docvec_direct(query: BugReport, artifacts: Artifacts) -> dict[str, float]:
    query_vec = artifacts.report_doc_vector(query)
    return {fid: embedding.doc_cosine(query_vec, vec)
            for fid, vec in artifacts.file_doc_vectors().items()}


def direct_relevancy(query: BugReport, files, model: MethodConfig,
                     artifacts: Artifacts) -> dict[str, float]:
    """Per-file direct score under the configured direct model."""
    kind = model.direct_model
    if kind == TFIDF_LOCAL:
        scores = _tfidf_direct(query, artifacts, "local")
    elif kind == TFIDF_GLOBAL:
        scores = _tfidf_direct(query, artifacts, "global")
    elif kind == DOC2VEC_GLOBAL:
        scores = _docvec_direct(query, artifacts)
    elif kind == COMBINED_GLOBAL:
        lexical = _minmax(_tfidf_direct(query, artifacts, "global"))
        semantic = _minmax(_docvec_direct(query, artifacts))
        scores = {fid: (lexical[fid] + semantic[fid]) / 2 for fid in lexical}
    else:
        raise ValueError(f"unknown direct model {kind!r}")
    wanted = {f.id for f in files}
    return {fid: s for fid, s in scores.items() if fid in wanted}


def _bridge(query: BugReport, history, artifacts: Artifacts,
            sim) -> dict[str, float]:
    scores = {f.id: 0.0 for f in artifacts.project.source_files}
    for past in history:
        if not past.fixed_files:
            continue
        similarity = sim(query, past)
        if similarity == 0.0:
            continue
        share = similarity / len(past.fixed_files)
        for fid in past.fixed_files:
            if fid in scores:
                scores[fid] += share
    return scores


def indirect_relevancy(query: BugReport, history, model: MethodConfig,
                       artifacts: Artifacts) -> dict[str, float]:
    """History-bridged score; an empty history yields an all-zero map.

    The caller is responsible for excluding the query itself (and, during
    evaluation, anything not strictly earlier) from ``history``.
    """
    kind = model.indirect_model
    if kind == NONE:
        return {f.id: 0.0 for f in artifacts.project.source_files}
    if kind in (TFIDF_LOCAL, TFIDF_GLOBAL):
        scope = "local" if kind == TFIDF_LOCAL else "global"

        def sim(q, past):
            return tfidf.cosine(artifacts.report_vector(q, scope),
                                artifacts.report_vector(past, scope))

        return _bridge(query, history, artifacts, sim)
    if kind == DOC2VEC_GLOBAL:
        def sim(q, past):
            return embedding.doc_cosine(artifacts.report_doc_vector(q),
                                        artifacts.report_doc_vector(past))

        return _bridge(query, history, artifacts, sim)
    if kind == COMBINED_GLOBAL:
        def tfidf_sim(q, past):
            return tfidf.cosine(artifacts.report_vector(q, "global"),
                                artifacts.report_vector(past, "global"))

        def doc_sim(q, past):
            return embedding.doc_cosine(artifacts.report_doc_vector(q),
                                        artifacts.report_doc_vector(past))

        lexical = _minmax(_bridge(query, history, artifacts, tfidf_sim))
        semantic = _minmax(_bridge(query, history, artifacts, doc_sim))
        return {fid: (lexical[fid] + semantic[fid]) / 2 for fid in lexical}
    raise ValueError(f"unknown indirect model {kind!r}")


def fuse(direct: dict[str, float], indirect: dict[str, float],
         w1: float, w2: float) -> dict[str, float]:
    """Min-max normalize both maps and combine them as w1*d + w2*i."""
    if set(direct) != set(indirect):
        raise ValueError("direct and indirect maps cover different file sets")
    direct_n = _minmax(direct)
    indirect_n = _minmax(indirect)
    return {fid: w1 * direct_n[fid] + w2 * indirect_n[fid] for fid in direct_n}


def history_for(query: BugReport, project: Project, policy: str = "earlier") -> list[BugReport]:
    """Reports usable as history for a query: everything strictly earlier
    in the project ordering, or every other report under ``policy="all"``."""
    if policy == "all":
        return [r for r in project.bug_reports if r.id != query.id]
    if policy != "earlier":
        raise ValueError(f"unknown history policy {policy!r}")
    out = []
    for report in project.bug_reports:
        if report.id == query.id:
            break
        out.append(report)
    return out


def localize(query: BugReport, project: Project, config: MethodConfig,
             artifacts: Artifacts, history: list[BugReport] | None = None) -> RankedList:
    """Rank every source file of the project for one query.

    ``history`` defaults to the reports strictly earlier than the query.
    Ties in the fused score break by file path so output order is total.
    """
    if history is None:
        history = history_for(query, project)
    direct = direct_relevancy(query, project.source_files, config, artifacts)
    indirect = indirect_relevancy(query, history, config, artifacts)
    fused = fuse(direct, indirect, config.w1, config.w2)
    entries = [RankEntry(fid, fused[fid], direct[fid], indirect[fid]) for fid in fused]
    entries.sort(key=lambda e: (-e.final_score, e.file_id))
    return RankedList(query_bug_id=query.id, entries=entries, method_id=config.method_id)
