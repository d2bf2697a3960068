"""On-disk cache for offline-trained global models.

Every artifact gets a sidecar ``.meta.json`` holding a fingerprint of the
corpus contents and the preprocessing/embedding configuration that
produced it. A fingerprint mismatch (or an unreadable artifact) forces a
retrain; nothing is trusted by filename alone.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from . import embedding, tfidf
from .corpus import Benchmark
from .preprocess import PreprocessConfig

logger = logging.getLogger(__name__)


def corpus_digest(benchmark: Benchmark) -> str:
    """Content hash over project names, file paths/texts and bug reports."""
    h = hashlib.sha256()
    for project in sorted(benchmark.projects, key=lambda p: p.name):
        h.update(project.name.encode())
        for src in project.source_files:
            h.update(src.id.encode())
            h.update(hashlib.sha256(src.raw_text.encode()).digest())
        for report in project.bug_reports:
            h.update(report.id.encode())
            h.update(hashlib.sha256(report.text.encode()).digest())
            h.update(",".join(sorted(report.fixed_files)).encode())
    return h.hexdigest()


def _fingerprint(kind: str, held_out: str, corpus: str,
                 preprocess_config: PreprocessConfig,
                 embed_config: embedding.EmbeddingConfig | None) -> str:
    payload = {
        "kind": kind,
        "held_out": held_out,
        "corpus": corpus,
        "preprocess": preprocess_config.fingerprint(),
        "embedding": embed_config.fingerprint() if embed_config else None,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


class ArtifactCache:
    """Directory of per-held-out-project global models."""

    def __init__(self, directory, benchmark: Benchmark,
                 preprocess_config: PreprocessConfig,
                 embed_config: embedding.EmbeddingConfig | None = None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.benchmark = benchmark
        self.preprocess_config = preprocess_config
        self.embed_config = embed_config
        self._corpus = corpus_digest(benchmark)

    def _paths(self, kind: str, held_out: str) -> tuple[Path, Path]:
        suffix = "txt" if kind == "idf" else "npz"
        artifact = self.directory / f"{kind}_{held_out}.{suffix}"
        return artifact, artifact.with_suffix(artifact.suffix + ".meta.json")

    def _is_fresh(self, kind: str, held_out: str, embed_config) -> bool:
        artifact, meta = self._paths(kind, held_out)
        if not artifact.is_file() or not meta.is_file():
            return False
        try:
            recorded = json.loads(meta.read_text("utf-8"))["fingerprint"]
        except (json.JSONDecodeError, KeyError, OSError):
            logger.warning("unreadable cache metadata for %s; retraining", artifact.name)
            return False
        return recorded == _fingerprint(kind, held_out, self._corpus,
                                        self.preprocess_config, embed_config)

    def _record(self, kind: str, held_out: str, embed_config) -> None:
        _, meta = self._paths(kind, held_out)
        meta.write_text(json.dumps({
            "fingerprint": _fingerprint(kind, held_out, self._corpus,
                                        self.preprocess_config, embed_config),
        }, indent=2), "utf-8")

    def global_vocabulary(self, held_out: str) -> tfidf.Vocabulary:
        """Load or build the leakage-safe global IDF model for a project."""
        artifact, _ = self._paths("idf", held_out)
        if self._is_fresh("idf", held_out, None):
            try:
                return tfidf.load_vocabulary(artifact)
            except (ValueError, OSError) as exc:
                logger.warning("corrupt cached IDF model %s (%s); retraining",
                               artifact.name, exc)
        logger.info("building global IDF model, held-out project %s", held_out)
        vocab = tfidf.build_global_idf(self.benchmark, held_out)
        tfidf.save_vocabulary(vocab, artifact)
        self._record("idf", held_out, None)
        return vocab

    def _training_corpus(self, held_out: str):
        """Source files of every project plus the other projects' reports."""
        docs, ids, vocab_docs = [], [], []
        for project in self.benchmark.projects:
            for src in project.source_files:
                docs.append(src.token_stream)
                ids.append(f"{project.name}/{src.id}")
                vocab_docs.append(src.token_stream)
            if project.name == held_out:
                continue
            for report in project.bug_reports:
                docs.append(report.token_stream)
                ids.append(f"{project.name}#{report.id}")
        return docs, ids, vocab_docs

    def embedding_model(self, held_out: str, mode: str) -> embedding.EmbeddingModel:
        """Load or train the paragraph-vector model of the given mode."""
        if self.embed_config is None:
            raise ValueError("no embedding configuration supplied")
        kind = "dm" if mode == embedding.PV_DM else "dbow"
        artifact, _ = self._paths(kind, held_out)
        if self._is_fresh(kind, held_out, self.embed_config):
            try:
                return embedding.load_model(artifact)
            except (ValueError, OSError, KeyError) as exc:
                logger.warning("corrupt cached model %s (%s); retraining",
                               artifact.name, exc)
        logger.info("training %s model, held-out project %s", mode, held_out)
        docs, ids, vocab_docs = self._training_corpus(held_out)
        model = embedding.train(docs, self.embed_config, mode,
                                doc_ids=ids, vocab_documents=vocab_docs)
        embedding.save_model(model, artifact)
        self._record(kind, held_out, self.embed_config)
        return model

    def train_all(self, held_out_projects, with_embeddings: bool = True) -> dict:
        """Materialize artifacts for each held-out project; returns paths."""
        built = {}
        for name in held_out_projects:
            self.global_vocabulary(name)
            entry = {"idf": str(self._paths("idf", name)[0])}
            if with_embeddings:
                self.embedding_model(name, embedding.PV_DM)
                self.embedding_model(name, embedding.PV_DBOW)
                entry["dm"] = str(self._paths("dm", name)[0])
                entry["dbow"] = str(self._paths("dbow", name)[0])
            built[name] = entry
        return built
