"""Tracking state space and the min-max regret operator.

An augmented state ``x = (s_c, s_l, window)`` pairs the causal controller's
current state with the benchmark state lagged ``k`` steps and the last ``k``
disturbances (oldest first).  Dense index order is ``s_c`` outermost, then
``s_l``, then the window digits in base ``|W|`` with the oldest digit most
significant.  Value tables are flat float64 arrays in this order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .system import SystemSpec


class AugmentedState(NamedTuple):
    s_c: int
    s_l: int
    window: tuple[int, ...]


@dataclass(frozen=True)
class AugmentedSpace:
    num_states: int
    num_disturbances: int
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"lookahead k must be >= 1, got {self.k}")

    @classmethod
    def of(cls, spec: SystemSpec, k: int) -> "AugmentedSpace":
        return cls(spec.num_states, spec.num_disturbances, k)

    @property
    def num_windows(self) -> int:
        return self.num_disturbances**self.k

    @property
    def size(self) -> int:
        return self.num_states**2 * self.num_windows

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.num_states, self.num_states, self.num_windows)

    def window_index(self, window: Sequence[int]) -> int:
        if len(window) != self.k:
            raise ValueError(f"window must have length {self.k}, got {len(window)}")
        idx = 0
        for w in window:
            if not 0 <= w < self.num_disturbances:
                raise ValueError(f"disturbance {w} out of range [0, {self.num_disturbances})")
            idx = idx * self.num_disturbances + int(w)
        return idx

    def window_digits(self, idx: int) -> tuple[int, ...]:
        digits = []
        for _ in range(self.k):
            idx, d = divmod(idx, self.num_disturbances)
            digits.append(d)
        return tuple(reversed(digits))

    def index(self, s_c: int, s_l: int, window: Sequence[int]) -> int:
        n = self.num_states
        if not (0 <= s_c < n and 0 <= s_l < n):
            raise ValueError(f"state indices ({s_c}, {s_l}) out of range [0, {n})")
        return (s_c * n + s_l) * self.num_windows + self.window_index(window)

    def decode(self, index: int) -> AugmentedState:
        if not 0 <= index < self.size:
            raise ValueError(f"augmented index {index} out of range [0, {self.size})")
        rest, widx = divmod(index, self.num_windows)
        s_c, s_l = divmod(rest, self.num_states)
        return AugmentedState(s_c, s_l, self.window_digits(widx))

    def shift(self, window_idx: int, w: int) -> int:
        """Window index after dropping the oldest entry and appending ``w``."""
        return (window_idx % (self.num_windows // self.num_disturbances)) * self.num_disturbances + w


def aligned_regret_cost(
    spec: SystemSpec, x: AugmentedState, a_c: int, a_l: int, w: int, k: int | None = None,
    gamma: float | None = None,
) -> float:
    """Benchmark reward at the lagged time minus the discounted causal reward.

    ``gamma`` defaults to the system discount; pass ``1.0`` for finite horizons.
    """
    k = len(x.window) if k is None else k
    g = spec.gamma if gamma is None else gamma
    return float(spec.reward[x.s_l, a_l, x.window[0]] - g**k * spec.reward[x.s_c, a_c, w])


def augmented_transition(spec: SystemSpec, x: AugmentedState, a_c: int, a_l: int, w: int) -> AugmentedState:
    f = spec.transition
    return AugmentedState(
        int(f[x.s_c, a_c, w]),
        int(f[x.s_l, a_l, x.window[0]]),
        tuple(x.window[1:]) + (int(w),),
    )


class RegretOperator:
    """Vectorized min-max operator on augmented value tables.

    ``discount=None`` uses the system discount; ``discount=1.0`` gives the
    undiscounted stage map of the finite-horizon DP.  The benchmark maximization
    is done first per causal successor state, then the causal min-max over
    ``(a_c, w)``; the cost of one application is about
    ``|S|^2 |W|^k (|W| |A| + |W| P)`` where ``P <= |A|`` is the number of distinct
    benchmark successors.
    """

    def __init__(self, spec: SystemSpec, k: int, discount: float | None = None):
        self.spec = spec
        self.k = k
        self.space = AugmentedSpace.of(spec, k)
        self.discount = spec.gamma if discount is None else float(discount)
        self.cost_weight = self.discount**k
        nS, nA, nW = spec.shape
        self._mid = nW ** (k - 1)

        # Benchmark successors per (s_l, w0), deduplicated keeping the best reward.
        # Pairs whose successor sets coincide up to a reward offset share one
        # maximization: r(s_l, a_l, w0) = offset[s_l, w0] + relative[group, p].
        groups: dict[tuple, int] = {}
        group_of = np.zeros((nS, nW), dtype=np.intp)
        offset = np.zeros((nS, nW))
        members = []
        for s in range(nS):
            for w in range(nW):
                best: dict[int, float] = {}
                for a in range(nA):
                    nxt = int(spec.transition[s, a, w])
                    r = float(spec.reward[s, a, w])
                    if nxt not in best or r > best[nxt]:
                        best[nxt] = r
                items = sorted(best.items())
                base = items[0][1]
                key = tuple((nxt, r - base) for nxt, r in items)
                if key not in groups:
                    groups[key] = len(groups)
                    members.append(key)
                group_of[s, w] = groups[key]
                offset[s, w] = base
        width = max(len(key) for key in members)
        succ = np.empty((len(members), width), dtype=np.intp)
        rel = np.empty((len(members), width))
        for g, key in enumerate(members):
            for p in range(width):
                # pad with a copy of the first entry, harmless under max
                nxt, r = key[p] if p < len(key) else key[0]
                succ[g, p] = nxt
                rel[g, p] = r
        self._succ_l = succ
        self._rel_l = rel
        self._group_l = group_of
        self._offset_l = offset
        self._wgrid = np.broadcast_to(np.arange(nW), (nA, nW))
        self._neg_cost_c = -self.cost_weight * spec.reward  # (S, A, W)

    # -- core ---------------------------------------------------------------

    def _benchmark_block(self, J: np.ndarray, s_next: int, out: np.ndarray | None = None) -> np.ndarray:
        """Benchmark-maximized continuation for causal successor ``s_next``.

        Returns ``H[w, s_l, w0, m] = max_{a_l} r(s_l, a_l, w0) + d * J(s_next, f(s_l, a_l, w0), m#w)``.
        """
        nS, _, nW = self.spec.shape
        Jn = J.reshape(nS, nS, self._mid, nW)[s_next]  # (s_l', m, w)
        JnT = Jn.transpose(2, 0, 1) * self.discount  # (w, s_l', m), fresh copy
        tmp = JnT[:, self._succ_l]  # (w, group, P, m)
        tmp += self._rel_l[None, :, :, None]
        best = tmp.max(axis=2)  # (w, group, m)
        res = best[:, self._group_l]  # (w, s_l, w0, m)
        res += self._offset_l[None, :, :, None]
        if out is not None:
            out[...] = res
            return out
        return res

    def _benchmark_all(self, J: np.ndarray) -> np.ndarray:
        nS, _, nW = self.spec.shape
        H = np.empty((nS, nW, nS, nW, self._mid))
        for s in range(nS):
            self._benchmark_block(J, s, out=H[s])
        return H.reshape(nS, nW, -1)

    def _causal_row(self, H: np.ndarray, s_c: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-action worst case for causal state ``s_c``: shape ``(A, |S| |W|^k)``."""
        idx = self.spec.transition[s_c]  # (A, W)
        G = H[idx, self._wgrid]  # (A, W, rest)
        G += self._neg_cost_c[s_c][:, :, None]
        return G.max(axis=1), G

    def apply(self, J: np.ndarray, with_policy: bool = False):
        """One application of the operator; optionally also the argmin actions."""
        J = np.asarray(J, dtype=np.float64)
        if J.shape != (self.space.size,):
            raise ValueError(f"value table must have shape ({self.space.size},), got {J.shape}")
        nS = self.spec.num_states
        H = self._benchmark_all(J)
        out = np.empty((nS, self.space.size // nS))
        policy = np.empty((nS, self.space.size // nS), dtype=np.int64) if with_policy else None
        for s in range(nS):
            worst, _ = self._causal_row(H, s)
            if with_policy:
                # argmin returns the first (lowest) index on ties
                best = worst.argmin(axis=0)
                policy[s] = best
                out[s] = np.take_along_axis(worst, best[None, :], axis=0)[0]
            else:
                out[s] = worst.min(axis=0)
        if with_policy:
            return out.reshape(-1), policy.reshape(-1)
        return out.reshape(-1)

    def gauss_seidel_sweep(self, J: np.ndarray) -> np.ndarray:
        """In-place block sweep over causal states (updates ``J`` and returns it)."""
        nS = self.spec.num_states
        H = self._benchmark_all(J)
        J2 = J.reshape(nS, -1)
        H4 = H.reshape(nS, self.spec.num_disturbances, nS, self.spec.num_disturbances, self._mid)
        for s in range(nS):
            worst, _ = self._causal_row(H, s)
            J2[s] = worst.min(axis=0)
            self._benchmark_block(J, s, out=H4[s])
        return J

    # -- single-state queries (runtime, diagnostics) -----------------------------

    def state_values(self, J: np.ndarray, index: int) -> np.ndarray:
        """Matrix ``Q[a_c, w, a_l] = rho + d * J(x+)`` at one augmented state."""
        x = self.space.decode(index)
        spec = self.spec
        nS, nA, nW = spec.shape
        f, r = spec.transition, spec.reward
        w0 = x.window[0]
        widx = index % self.space.num_windows
        new_w = np.array([self.space.shift(widx, w) for w in range(nW)])
        s_c_next = f[x.s_c]  # (A_c, W)
        s_l_next = f[x.s_l, :, w0]  # (A_l,)
        nxt = ((s_c_next[:, :, None] * nS + s_l_next[None, None, :]) * self.space.num_windows
               + new_w[None, :, None])
        rho = r[x.s_l, :, w0][None, None, :] - self.cost_weight * r[x.s_c][:, :, None]
        return rho + self.discount * J[nxt]

    def causal_action(self, J: np.ndarray, index: int) -> int:
        Q = self.state_values(J, index)
        return int(Q.reshape(Q.shape[0], -1).max(axis=1).argmin())

    def benchmark_response(self, J: np.ndarray, index: int, a_c: int, w: int) -> int:
        """Benchmark action maximizing the stage value for the realized ``w``."""
        Q = self.state_values(J, index)
        return int(Q[a_c, w].argmax())

    def worst_case(self, J: np.ndarray, index: int, a_c: int) -> tuple[int, int, float]:
        """Lexicographically smallest maximizing ``(w, a_l)`` and its value."""
        Q = self.state_values(J, index)[a_c]
        flat = int(Q.argmax())
        w, a_l = divmod(flat, Q.shape[1])
        return w, a_l, float(Q[w, a_l])


def apply_regret_bellman(spec: SystemSpec, k: int, J: np.ndarray) -> tuple[np.ndarray, float]:
    """Apply the discounted operator once; returns ``(TJ, ||TJ - J||_inf)``."""
    TJ = RegretOperator(spec, k).apply(J)
    return TJ, float(np.max(np.abs(TJ - J)))
