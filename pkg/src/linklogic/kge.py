"""ComplEx embeddings: scoring, top-k queries, a small SGD trainer, filtered MRR and persistence."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import struct
import zlib
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit, log_expit

from .kg import ConfigError, KnowledgeGraph, Triple, Vocabulary

logger = logging.getLogger(__name__)

PLAUSIBILITY_EPS = 1e-12
MAGIC = b"LLKE"
FORMAT_VERSION = 1


class TrainingError(RuntimeError):
    pass


class EmbeddingFormatError(ValueError):
    pass


@dataclass
class EmbeddingStore:
    """Complex entity and relation embeddings of a common dimension.

    ``entities`` has shape (|E|, d) and ``relations`` (|R|, d), both complex128.
    """

    entities: np.ndarray
    relations: np.ndarray

    def __post_init__(self):
        self.entities = np.ascontiguousarray(self.entities, dtype=np.complex128)
        self.relations = np.ascontiguousarray(self.relations, dtype=np.complex128)
        if self.entities.ndim != 2 or self.relations.ndim != 2:
            raise ValueError("embedding tables must be 2-D")
        if self.entities.shape[1] != self.relations.shape[1]:
            raise ValueError("entity and relation dimensions differ")
        if not (np.isfinite(self.entities).all() and np.isfinite(self.relations).all()):
            raise ValueError("embeddings contain non-finite values")

    @property
    def dim(self) -> int:
        return self.entities.shape[1]

    @property
    def n_entities(self) -> int:
        return self.entities.shape[0]

    @property
    def n_relations(self) -> int:
        return self.relations.shape[0]

    def entity(self, e) -> np.ndarray:
        """Entity vector by id; arrays are passed through (used for perturbed vectors)."""
        if isinstance(e, (int, np.integer)):
            if not 0 <= e < self.n_entities:
                raise KeyError(f"unknown entity id {e}")
            return self.entities[e]
        return np.asarray(e, dtype=np.complex128)

    def relation(self, r) -> np.ndarray:
        if isinstance(r, (int, np.integer)):
            if not 0 <= r < self.n_relations:
                raise KeyError(f"unknown relation id {r}")
            return self.relations[r]
        return np.asarray(r, dtype=np.complex128)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, EmbeddingStore)
            and np.array_equal(self.entities, other.entities)
            and np.array_equal(self.relations, other.relations)
        )

    @classmethod
    def random(cls, n_entities: int, n_relations: int, dim: int, seed: int = 0) -> "EmbeddingStore":
        """Uniform init in [-1/sqrt(d), 1/sqrt(d)] on real and imaginary parts."""
        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(dim)

        def draw(n):
            return rng.uniform(-bound, bound, (n, dim)) + 1j * rng.uniform(-bound, bound, (n, dim))

        return cls(draw(n_entities), draw(n_relations))


def complex_score(h: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Re(<h, r, conj(t)>) over the last axis, broadcasting leading axes."""
    hr, hi, rr, ri, tr, ti = h.real, h.imag, r.real, r.imag, t.real, t.imag
    # grouped by Re(r) and Im(r) so that a real relation scores (h, t) and (t, h) bit-identically
    return np.sum(rr * (hr * tr + hi * ti) + ri * (hr * ti - hi * tr), axis=-1)


def score_raw(store: EmbeddingStore, h, r, t):
    """ComplEx score. ``h``/``t`` may be ids or (batches of) complex vectors."""
    s = complex_score(store.entity(h), store.relation(r), store.entity(t))
    return float(s) if np.ndim(s) == 0 else s


def squash(score):
    """Logistic plausibility clamped to [eps, 1 - eps]."""
    return np.clip(expit(score), PLAUSIBILITY_EPS, 1.0 - PLAUSIBILITY_EPS)


def plausibility(store: EmbeddingStore, h, r, t):
    p = squash(score_raw(store, h, r, t))
    return float(p) if np.ndim(p) == 0 else p


def tail_scores(store: EmbeddingStore, h, r) -> np.ndarray:
    """Raw scores of (h, r, e) for every entity e."""
    a = store.entity(h) * store.relation(r)
    E = store.entities
    return E.real @ a.real + E.imag @ a.imag


def head_scores(store: EmbeddingStore, r, t) -> np.ndarray:
    """Raw scores of (e, r, t) for every entity e."""
    b = store.relation(r) * np.conj(store.entity(t))
    E = store.entities
    return E.real @ b.real - E.imag @ b.imag


def _top_k(scores: np.ndarray, k: int) -> list[tuple[int, float]]:
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, len(scores))
    order = np.lexsort((np.arange(len(scores)), -scores))[:k]
    return [(int(i), float(scores[i])) for i in order]


def top_k_tails(store: EmbeddingStore, h, r, k: int) -> list[tuple[int, float]]:
    """The k best tails for (h, r, ?), descending score, ties to the lower id."""
    return _top_k(tail_scores(store, h, r), k)


def top_k_heads(store: EmbeddingStore, r, t, k: int) -> list[tuple[int, float]]:
    return _top_k(head_scores(store, r, t), k)


# ---------------------------------------------------------------------------
# training


_DGLKE_ALIASES = {
    "lr": "learning_rate",
    "neg_adversarial_sampling": "adversarial_sampling",
    "adversarial_temperature": "adversarial_temperature",
}
_IGNORED_KEYS = {"batch_size_eval"}


@dataclass(frozen=True)
class TrainingConfig:
    hidden_dim: int = 400
    batch_size: int = 1000
    neg_sample_size: int = 200
    learning_rate: float = 0.1
    max_step: int = 50000
    adversarial_sampling: bool = True
    adversarial_temperature: float = 1.0
    regularization_coef: float = 2e-6
    seed: int = 0
    log_every: int = 100

    def __post_init__(self):
        for name in ("hidden_dim", "batch_size", "neg_sample_size", "max_step", "log_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.learning_rate <= 0 or self.adversarial_temperature <= 0:
            raise ConfigError("learning_rate and adversarial_temperature must be positive")
        if self.regularization_coef < 0:
            raise ConfigError("regularization_coef must be non-negative")

    @classmethod
    def from_mapping(cls, values: Mapping) -> "TrainingConfig":
        """Build from a flat mapping; DGL-KE hyperparameter names are accepted."""
        fields = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in values.items():
            if key == "model_name":
                if str(value).lower() != "complex":
                    raise ConfigError(f"model_name: only ComplEx is supported, got {value!r}")
                continue
            if key in _IGNORED_KEYS:
                continue
            name = _DGLKE_ALIASES.get(key, key)
            if name not in fields:
                raise ConfigError(f"unknown training config key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)


def batch_loss_and_grads(
    entities: np.ndarray,
    relations: np.ndarray,
    pos: np.ndarray,
    neg: np.ndarray,
    corrupt_head: np.ndarray,
    config: TrainingConfig,
):
    """Logistic loss of one batch and its gradient.

    ``pos`` is (B, 3), ``neg`` is a shared set of negative entity ids, and
    ``corrupt_head[b]`` says whether positive b is corrupted on the head side.
    The loss is 0.5 * (positive term + negative term) + L3 regularization.
    Self-adversarial weights are treated as constants and not differentiated.
    Returns ``(loss, ent_idx, ent_grad, rel_idx, rel_grad)``; indices may repeat
    and gradients are w.r.t. the complex parameters (real grad + 1j * imag grad).
    """
    h_id, r_id, t_id = pos[:, 0], pos[:, 1], pos[:, 2]
    h, r, t = entities[h_id], relations[r_id], entities[t_id]
    n = entities[neg]
    B = len(pos)

    s_pos = complex_score(h, r, t)
    loss = -0.5 * log_expit(s_pos).mean()
    g_pos = -0.5 * expit(-s_pos) / B

    gh = g_pos[:, None] * np.conj(r) * t
    gr = g_pos[:, None] * np.conj(h) * t
    gt = g_pos[:, None] * h * r
    g_neg_ent = np.zeros_like(n)

    for head_side in (False, True):
        rows = np.flatnonzero(corrupt_head == head_side)
        if len(rows) == 0:
            continue
        if head_side:
            b = r[rows] * np.conj(t[rows])
            s = b.real @ n.real.T - b.imag @ n.imag.T
        else:
            a = h[rows] * r[rows]
            s = a.real @ n.real.T + a.imag @ n.imag.T
        if config.adversarial_sampling:
            z = config.adversarial_temperature * s
            w = np.exp(z - z.max(axis=1, keepdims=True))
            w /= w.sum(axis=1, keepdims=True)
        else:
            w = np.full_like(s, 1.0 / s.shape[1])
        loss += -0.5 * (w * log_expit(-s)).sum() / B
        g = 0.5 * w * expit(s) / B
        if head_side:
            gb = g @ np.conj(n)
            gr[rows] += gb * t[rows]
            gt[rows] += np.conj(gb) * r[rows]
            g_neg_ent += g.T @ np.conj(b)
        else:
            ga = g @ n
            gh[rows] += np.conj(r[rows]) * ga
            gr[rows] += np.conj(h[rows]) * ga
            g_neg_ent += g.T @ a

    coef = config.regularization_coef
    if coef > 0:
        def l3(x):
            return np.sum(np.abs(x.real) ** 3 + np.abs(x.imag) ** 3)

        def dl3(x):
            return 3 * coef * (np.sign(x.real) * x.real**2 + 1j * np.sign(x.imag) * x.imag**2)

        loss += coef * (l3(h) + l3(r) + l3(t))
        gh += dl3(h)
        gr += dl3(r)
        gt += dl3(t)

    ent_idx = np.concatenate([h_id, t_id, neg])
    ent_grad = np.concatenate([gh, gt, g_neg_ent])
    return float(loss), ent_idx, ent_grad, r_id, gr


def train(
    graph: KnowledgeGraph,
    config: TrainingConfig,
    n_entities: int | None = None,
    n_relations: int | None = None,
    callback=None,
) -> EmbeddingStore:
    """SGD on the logistic loss with uniform negatives (shared per batch).

    Deterministic for a fixed ``config.seed``. ``callback(step, loss)`` is called
    every ``config.log_every`` steps.
    """
    if len(graph) == 0:
        raise ValueError("cannot train on an empty graph")
    n_entities = len(graph.entities) if n_entities is None else n_entities
    n_relations = len(graph.relations) if n_relations is None else n_relations
    rng = np.random.default_rng(config.seed)
    store = EmbeddingStore.random(n_entities, n_relations, config.hidden_dim, seed=config.seed)
    E, R = store.entities, store.relations
    triples = graph.array()
    N = len(triples)
    B = min(config.batch_size, N)
    perm, cursor = rng.permutation(N), 0
    for step in range(1, config.max_step + 1):
        if cursor + B > N:
            perm, cursor = rng.permutation(N), 0
        pos = triples[perm[cursor:cursor + B]]
        cursor += B
        neg = rng.integers(0, n_entities, config.neg_sample_size)
        corrupt_head = rng.random(B) < 0.5
        loss, ei, eg, ri, rg = batch_loss_and_grads(E, R, pos, neg, corrupt_head, config)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}")
        np.add.at(E, ei, -config.learning_rate * eg)
        np.add.at(R, ri, -config.learning_rate * rg)
        if step % config.log_every == 0 or step == config.max_step:
            if not (np.isfinite(E).all() and np.isfinite(R).all()):
                raise TrainingError(f"non-finite parameters at step {step}")
            if callback is not None:
                callback(step, loss)
    return EmbeddingStore(E, R)


# ---------------------------------------------------------------------------
# evaluation


def _filtered_rank(scores: np.ndarray, target: int, known: set[int]) -> float:
    mask = np.ones(len(scores), dtype=bool)
    if known:
        mask[list(known)] = False
    mask[target] = False
    s = scores[target]
    others = scores[mask]
    return 1.0 + np.count_nonzero(others > s) + 0.5 * np.count_nonzero(others == s)


def evaluate_mrr(store: EmbeddingStore, test: Sequence[Triple], filter_graph: KnowledgeGraph | None = None) -> dict:
    """Filtered MRR over head and tail corruption, per relation and overall.

    Ties count half. Returns ``{"overall": float, "per_relation": {rel_id: float},
    "counts": {rel_id: int}}`` where counts are ranking events (2 per triple).
    """
    if not test:
        raise ValueError("test set is empty")
    known_tails: dict[tuple[int, int], set[int]] = defaultdict(set)
    known_heads: dict[tuple[int, int], set[int]] = defaultdict(set)
    for h, r, t in (filter_graph.triples if filter_graph is not None else ()):
        known_tails[(h, r)].add(t)
        known_heads[(r, t)].add(h)
    rr: dict[int, list[float]] = defaultdict(list)
    for h, r, t in test:
        rank_t = _filtered_rank(tail_scores(store, h, r), t, known_tails.get((h, r), set()))
        rank_h = _filtered_rank(head_scores(store, r, t), h, known_heads.get((r, t), set()))
        rr[r].extend((1.0 / rank_t, 1.0 / rank_h))
    everything = [v for vals in rr.values() for v in vals]
    return {
        "overall": float(np.mean(everything)),
        "per_relation": {r: float(np.mean(v)) for r, v in sorted(rr.items())},
        "counts": {r: len(v) for r, v in sorted(rr.items())},
    }


# ---------------------------------------------------------------------------
# persistence


def names_digest(vocab: Vocabulary) -> str:
    return hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()


def save_embeddings(
    store: EmbeddingStore,
    path: str | os.PathLike,
    config: TrainingConfig | None = None,
    entities: Vocabulary | None = None,
    relations: Vocabulary | None = None,
) -> None:
    """Write the binary ``LLKE`` file and a ``.json`` sidecar."""
    body = bytearray()
    body += MAGIC
    body += struct.pack("<IIII", FORMAT_VERSION, store.n_entities, store.n_relations, store.dim)
    for arr in (store.entities.real, store.entities.imag, store.relations.real, store.relations.imag):
        body += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(bytes(body))
    sidecar = {
        "format_version": FORMAT_VERSION,
        "n_entities": store.n_entities,
        "n_relations": store.n_relations,
        "dim": store.dim,
        "config": dataclasses.asdict(config) if config is not None else None,
        "entity_names_sha256": names_digest(entities) if entities is not None else None,
        "relation_names_sha256": names_digest(relations) if relations is not None else None,
    }
    with open(os.fspath(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_embeddings(
    path: str | os.PathLike,
    entities: Vocabulary | None = None,
    relations: Vocabulary | None = None,
) -> EmbeddingStore:
    """Read an ``LLKE`` file, checking magic, version, length, CRC and (optionally) name tables."""
    with open(path, "rb") as fh:
        data = fh.read()
    header = 4 + 16
    if len(data) < header + 4 or data[:4] != MAGIC:
        raise EmbeddingFormatError(f"{path}: not an embedding file (bad magic or truncated header)")
    version, n_ent, n_rel, dim = struct.unpack("<IIII", data[4:header])
    if version != FORMAT_VERSION:
        raise EmbeddingFormatError(f"{path}: unsupported format version {version}")
    expected = header + 8 * dim * 2 * (n_ent + n_rel) + 4
    if len(data) != expected:
        raise EmbeddingFormatError(f"{path}: truncated or oversized file ({len(data)} bytes, expected {expected})")
    (crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != crc:
        raise EmbeddingFormatError(f"{path}: checksum mismatch")
    floats = np.frombuffer(data, dtype="<f8", offset=header, count=2 * dim * (n_ent + n_rel))
    ne = n_ent * dim
    nr = n_rel * dim
    ent = floats[:ne].reshape(n_ent, dim) + 1j * floats[ne:2 * ne].reshape(n_ent, dim)
    rel = floats[2 * ne:2 * ne + nr].reshape(n_rel, dim) + 1j * floats[2 * ne + nr:].reshape(n_rel, dim)
    if entities is not None and len(entities) != n_ent:
        raise EmbeddingFormatError(f"{path}: file has {n_ent} entities, name table has {len(entities)}")
    if relations is not None and len(relations) != n_rel:
        raise EmbeddingFormatError(f"{path}: file has {n_rel} relations, name table has {len(relations)}")
    sidecar_path = os.fspath(path) + ".json"
    if os.path.exists(sidecar_path):
        with open(sidecar_path, encoding="utf-8") as fh:
            sidecar = json.load(fh)
        for vocab, key in ((entities, "entity_names_sha256"), (relations, "relation_names_sha256")):
            want = sidecar.get(key)
            if vocab is not None and want is not None and names_digest(vocab) != want:
                raise EmbeddingFormatError(f"{path}: {key} does not match the supplied name table")
    return EmbeddingStore(ent, rel)
