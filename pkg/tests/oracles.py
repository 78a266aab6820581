"""Brute-force reference implementations shared by the test files."""
import numpy as np

from halfsup.arith import atkin_lehner_matrix, divisors, gamma0_generators


def group_generators(N):
    """Generators of A_0(2N): Gamma_0(2N), the W(Q) with Q | N, and W(2)."""
    gens = list(gamma0_generators(2 * N))
    gens += [g.inverse() for g in gens]
    gens += [atkin_lehner_matrix(Q, N) for Q in divisors(N) if Q > 1]
    gens.append(atkin_lehner_matrix(2, N))
    return gens


def brute_max_im(z, N, length=6, beam=4000):
    """Largest Im over words of length <= `length` (x reduced mod 1).

    Each layer keeps the `beam` highest distinct points.
    """
    gens = [np.array(g.tuple(), dtype=float) for g in group_generators(N)]
    front = np.array([z])
    best = z.imag
    for _ in range(length):
        new = []
        for a, b, c, d in gens:
            w = (a * front + b) / (c * front + d)
            new.append(w - np.floor(w.real + 0.5))
        front = np.concatenate(new)
        best = max(best, float(front.imag.max()))
        key = np.round(front.real, 9) + 1j * np.round(front.imag, 9)
        _, idx = np.unique(key, return_index=True)
        front = front[idx]
        front = front[np.argsort(-front.imag)[:beam]]
    return best
