"""Multi-hop attention network over short-term dialog turns and hashed
knowledge-base facts, trained by SGD on a cross-entropy ranking loss.

Forward pass, for input bag b, memory bags x_i with time slots s_i:

    u_0 = A_in b            m_i = A_mem x_i + T[s_i]
    hop k:  p = softmax(u_{k-1} . m_i)   o = R_k sum_i p_i m_i   u_k = o + u_{k-1}
    score_c = u_K . (W^T y_c)            dist = softmax(scores)

With no memory all hops are skipped and the model degenerates to a
two-dictionary embedding scorer.  Backprop is written out by hand; the
gradient tests check it against central finite differences.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from dialeval import NumericalError
from dialeval.kb import KnowledgeBase
from dialeval.models.config import INIT_STD, TrainConfig
from dialeval.models.embeddings import as_arrays
from dialeval.text import Vocabulary, bag, tokenize

LONG_TERM_SLOT = 0


@dataclass
class MemoryState:
    """Embeddable view of one dialog position: prior turns, hashed facts and
    the current input, all as token bags."""

    input_bag: dict[int, int]
    memory_bags: list[dict[int, int]]
    slots: list[int]


class MemN2NParams:
    def __init__(self, A_in, A_mem, W, R, T):
        self.A_in = A_in      # d x V input embedding
        self.A_mem = A_mem    # d x V memory embedding (may alias A_in)
        self.W = W            # V x d output embedding (may be a transposed
                              # view of A_in when dictionaries are shared)
        self.R = R            # K x d x d per-hop rotations
        self.T = T            # (max_memories + 1) x d time features; row 0 is
                              # reserved for long-term (KB) memories

    @property
    def hops(self) -> int:
        return self.R.shape[0]

    @property
    def dim(self) -> int:
        return self.A_in.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.A_in.shape[1]

    @property
    def n_dicts(self) -> int:
        if self.W.base is self.A_in:
            return 1
        return 2 if self.A_mem is self.A_in else 3

    def check_finite(self) -> None:
        for name, arr in (("A_in", self.A_in), ("A_mem", self.A_mem),
                          ("W", self.W), ("R", self.R), ("T", self.T)):
            if not np.all(np.isfinite(arr)):
                raise NumericalError(f"non-finite values in {name}")


def init_memn2n(V: int, d: int, hops: int, max_memories: int,
                n_dicts: int = 1, seed: int = 0) -> MemN2NParams:
    rng = np.random.default_rng(seed)
    A_in = rng.normal(0.0, INIT_STD, size=(d, V))
    A_mem = A_in if n_dicts < 3 else rng.normal(0.0, INIT_STD, size=(d, V))
    # n_dicts == 1 ties the output columns to the input embedding
    W = A_in.T if n_dicts == 1 else rng.normal(0.0, INIT_STD, size=(V, d))
    R = rng.normal(0.0, INIT_STD, size=(hops, d, d))
    T = rng.normal(0.0, INIT_STD, size=(max_memories + 1, d))
    return MemN2NParams(A_in, A_mem, W, R, T)


# ---------------------------------------------------------------------------
# memory construction


def build_memory(
    context: list[tuple[str, str]],
    input_text: str,
    kb: KnowledgeBase | None,
    vocab: Vocabulary,
    cfg: TrainConfig,
) -> MemoryState:
    """Short-term items are the prior turns (time slots counting backwards
    from the most recent reply); long-term items are KB facts recalled by
    hashing the tokens of the last hash_n messages (0 = all, input included),
    capped at max_memories preferring facts recalled through rarer tokens."""
    memory_bags: list[dict[int, int]] = []
    slots: list[int] = []
    n_turns = len(context)
    for idx, (user_text, reply_text) in enumerate(context):
        # turn idx contributes slots 2*(n_turns-idx) and 2*(n_turns-idx)-1
        back = n_turns - idx
        for text, slot in ((user_text, 2 * back), (reply_text, 2 * back - 1)):
            memory_bags.append(bag(tokenize(vocab, text)))
            slots.append(min(slot, cfg.max_memories))

    if kb is not None and kb.n_facts:
        messages = [t for turn in context for t in turn] + [input_text]
        if cfg.hash_n > 0:
            messages = messages[-cfg.hash_n:]
        tokens: list[str] = []
        seen: set[str] = set()
        for msg in messages:
            for tid in tokenize(vocab, msg):
                surface = vocab.symbols[tid]
                if surface not in seen:
                    seen.add(surface)
                    tokens.append(surface)
        # rarer tokens first, so the cap keeps the most specific facts
        tokens = [t for t in tokens if kb.fact_freq.get(t, 0) <= cfg.hash_cutoff]
        tokens.sort(key=lambda t: (kb.fact_freq.get(t, 0), t))
        fact_ids: list[int] = []
        seen_facts: set[int] = set()
        budget = cfg.max_memories
        for tok in tokens:
            if len(fact_ids) >= budget:
                break
            for fid in kb.word_index.get(tok, ()):
                if fid not in seen_facts:
                    seen_facts.add(fid)
                    fact_ids.append(fid)
                    if len(fact_ids) >= budget:
                        break
        for fid in fact_ids:
            memory_bags.append(bag(tokenize(vocab, kb.render_fact(fid))))
            slots.append(LONG_TERM_SLOT)

    return MemoryState(
        input_bag=bag(tokenize(vocab, input_text)),
        memory_bags=memory_bags,
        slots=slots,
    )


# ---------------------------------------------------------------------------
# forward / backward


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def candidate_matrix(W: np.ndarray, candidate_bags: list[dict[int, int]]) -> np.ndarray:
    """C x d matrix of output embeddings W^T y_c; cache this for fixed pools."""
    G = np.zeros((len(candidate_bags), W.shape[1]))
    for c, y in enumerate(candidate_bags):
        ids, counts = as_arrays(y)
        if ids.size:
            G[c] = counts @ W[ids]
    return G


def _embed_memories(p: MemN2NParams, ms: MemoryState) -> np.ndarray:
    M = np.zeros((len(ms.memory_bags), p.dim))
    for i, (x, slot) in enumerate(zip(ms.memory_bags, ms.slots)):
        ids, counts = as_arrays(x)
        if ids.size:
            M[i] = p.A_mem[:, ids] @ counts
        M[i] += p.T[slot]
    return M


def memn2n_forward(
    ms: MemoryState,
    candidate_bags: list[dict[int, int]],
    p: MemN2NParams,
    G: np.ndarray | None = None,
    _cache: dict | None = None,
):
    """Candidate scores (pre-softmax) and the attention vector of every hop."""
    if not candidate_bags and G is None:
        raise NumericalError("no candidates to score")
    ids, counts = as_arrays(ms.input_bag)
    u = p.A_in[:, ids] @ counts if ids.size else np.zeros(p.dim)
    attentions: list[np.ndarray] = []
    us = [u]
    if ms.memory_bags:
        M = _embed_memories(p, ms)
        for k in range(p.hops):
            attn = _softmax(M @ u)
            c = attn @ M
            o = p.R[k] @ c
            u = o + u
            attentions.append(attn)
            us.append(u)
    else:
        M = np.zeros((0, p.dim))
    if G is None:
        G = candidate_matrix(p.W, candidate_bags)
    scores = G @ u
    if _cache is not None:
        _cache.update(M=M, us=us, attentions=attentions, G=G)
    return scores, attentions


def memn2n_distribution(scores: np.ndarray) -> np.ndarray:
    return _softmax(scores)


def memn2n_grads(
    ms: MemoryState,
    candidate_bags: list[dict[int, int]],
    gold_idx: int,
    p: MemN2NParams,
):
    """Loss -log softmax(scores)[gold] and dense gradients for every
    parameter matrix (A_in / A_mem / W reported separately even when tied)."""
    cache: dict = {}
    scores, _ = memn2n_forward(ms, candidate_bags, p, _cache=cache)
    dist = _softmax(scores)
    loss = -float(np.log(max(dist[gold_idx], 1e-300)))

    M, us, attentions = cache["M"], cache["us"], cache["attentions"]
    d, V = p.A_in.shape
    dz = dist.copy()
    dz[gold_idx] -= 1.0

    dW = np.zeros_like(p.W)
    q = us[-1]
    for c, y in enumerate(candidate_bags):
        ids, counts = as_arrays(y)
        if ids.size:
            dW[ids] += dz[c] * np.outer(counts, q)
    # dq = sum_c dz_c W^T y_c
    dq = cache["G"].T @ dz

    dR = np.zeros_like(p.R)
    dM = np.zeros_like(M)
    du = dq
    n_hops = len(attentions)
    for k in range(n_hops - 1, -1, -1):
        u_prev = us[k]
        attn = attentions[k]
        c_vec = attn @ M
        do = du
        dR[k] = np.outer(do, c_vec)
        dc = p.R[k].T @ do
        dp = M @ dc
        da = attn * (dp - float(attn @ dp))
        dM += np.outer(attn, dc) + np.outer(da, u_prev)
        du = du + da @ M  # residual path plus attention match

    dA_in = np.zeros_like(p.A_in)
    ids, counts = as_arrays(ms.input_bag)
    if ids.size:
        dA_in[:, ids] += np.outer(du, counts)
    dA_mem = np.zeros_like(p.A_mem)
    dT = np.zeros_like(p.T)
    for i, (x, slot) in enumerate(zip(ms.memory_bags, ms.slots)):
        x_ids, x_counts = as_arrays(x)
        if x_ids.size:
            dA_mem[:, x_ids] += np.outer(dM[i], x_counts)
        dT[slot] += dM[i]
    return loss, {"A_in": dA_in, "A_mem": dA_mem, "W": dW, "R": dR, "T": dT}


def memn2n_train_step(
    ms: MemoryState,
    candidate_bags: list[dict[int, int]],
    gold_idx: int,
    p: MemN2NParams,
    lr: float,
) -> float:
    loss, grads = memn2n_grads(ms, candidate_bags, gold_idx, p)
    if not np.isfinite(loss):
        raise NumericalError("non-finite cross-entropy loss")
    tied_out = p.W.base is p.A_in
    p.A_in -= lr * grads["A_in"]
    if p.A_mem is p.A_in:
        p.A_in -= lr * grads["A_mem"]
    else:
        p.A_mem -= lr * grads["A_mem"]
    if tied_out:
        # W is a transposed view of A_in: write through it
        p.A_in -= lr * grads["W"].T
    else:
        p.W -= lr * grads["W"]
    p.R -= lr * grads["R"]
    p.T -= lr * grads["T"]
    return loss


@dataclass
class PreparedExample:
    state: MemoryState
    gold_indices: list[int]   # indices into the candidate list
    candidate_bags: list[dict[int, int]] | None = None  # None: shared set


def memn2n_train(
    prepared: list[PreparedExample],
    shared_candidates: list[dict[int, int]] | None,
    params: MemN2NParams,
    cfg: TrainConfig,
    log_fn=None,
) -> list[float]:
    """SGD epochs over prepared examples; multi-gold examples train against a
    seeded-random gold each step.  Returns per-epoch mean losses."""
    cfg.validate()
    if not prepared:
        raise NumericalError("empty training data")
    rng = random.Random(cfg.seed)
    order = list(range(len(prepared)))
    epoch_losses = []
    for epoch in range(cfg.epochs):
        rng.shuffle(order)
        total = 0.0
        for i in order:
            ex = prepared[i]
            cands = ex.candidate_bags if ex.candidate_bags is not None else shared_candidates
            gold = ex.gold_indices[rng.randrange(len(ex.gold_indices))]
            try:
                total += memn2n_train_step(ex.state, cands, gold, params, cfg.learning_rate)
            except NumericalError as e:
                raise NumericalError(f"epoch {epoch} example {i}: {e}") from e
        params.check_finite()
        mean_loss = total / len(prepared)
        epoch_losses.append(mean_loss)
        if log_fn:
            log_fn(epoch, mean_loss)
    return epoch_losses
