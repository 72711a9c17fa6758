"""Matrix-factorization recommender: SGD on squared error over observed
ratings; at test time a pseudo-user vector is least-squares fit to the
five-star history and items are ranked by predicted score."""

from __future__ import annotations

import numpy as np

from dialeval import NumericalError
from dialeval.ingest import Ratings
from dialeval.models.config import INIT_STD


class MFParams:
    def __init__(self, user_factors: np.ndarray, item_factors: np.ndarray,
                 item_ids: list[int]):
        self.user_factors = user_factors    # n_users x d
        self.item_factors = item_factors    # n_items x d
        self.item_ids = item_ids            # row -> KB entity id
        self.item_index = {e: i for i, e in enumerate(item_ids)}

    @property
    def dim(self) -> int:
        return self.item_factors.shape[1]


def mf_train(ratings: Ratings, d: int, lr: float, epochs: int, seed: int = 0,
             reg: float = 0.0, log_fn=None) -> tuple[MFParams, list[float]]:
    if not any(ratings.by_user):
        raise NumericalError("empty ratings matrix")
    item_ids = ratings.movie_ids()
    item_index = {e: i for i, e in enumerate(item_ids)}
    triples = [
        (u, item_index[m], float(r))
        for u, per_user in enumerate(ratings.by_user)
        for m, r in sorted(per_user.items())
    ]
    rng = np.random.default_rng(seed)
    P = rng.normal(0.0, INIT_STD, size=(ratings.n_users, d))
    Q = rng.normal(0.0, INIT_STD, size=(len(item_ids), d))
    order = np.arange(len(triples))
    epoch_losses = []
    for epoch in range(epochs):
        rng.shuffle(order)
        total = 0.0
        for idx in order:
            u, i, r = triples[idx]
            err = r - float(P[u] @ Q[i])
            total += err * err
            pu = P[u].copy()
            P[u] += lr * (err * Q[i] - reg * P[u])
            Q[i] += lr * (err * pu - reg * Q[i])
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
            raise NumericalError(f"factorization diverged at epoch {epoch}")
        mse = total / len(triples)
        epoch_losses.append(mse)
        if log_fn:
            log_fn(epoch, mse)
    return MFParams(P, Q, item_ids), epoch_losses


def mf_rank(history: set[int], params: MFParams) -> list[int]:
    """Rank KB entity ids of movies for a user described only by the movies
    they rated 5; history items are excluded from the output."""
    rows = [params.item_index[m] for m in sorted(history) if m in params.item_index]
    if not rows:
        return []
    Q = params.item_factors[rows]
    target = np.full(len(rows), 5.0)
    d = params.dim
    # tiny ridge keeps the solve well-posed for short histories
    u = np.linalg.solve(Q.T @ Q + 1e-8 * np.eye(d), Q.T @ target)
    scores = params.item_factors @ u
    hist_rows = set(rows)
    order = np.lexsort((np.arange(len(scores)), -scores))
    return [params.item_ids[i] for i in order if i not in hist_rows]
