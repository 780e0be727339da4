import numpy as np

from .exceptions import SolverError


def check_diagonal_dominance(
    lower: np.ndarray,
    diag: np.ndarray,
    upper: np.ndarray,
    nodes: np.ndarray | None = None,
    offset: int = 0,
) -> None:
    """Raise SolverError at the first row that is not strictly diagonally dominant.

    ``offset`` maps row k to node ``k + offset``; ``nodes`` (indexed by node)
    only enrich the message.
    """
    off = np.abs(lower) + np.abs(upper)
    failing = np.nonzero(~(np.abs(diag) > off))[0]
    if failing.size:
        row = int(failing[0])
        node = row + offset
        where = f" (x={nodes[node]})" if nodes is not None else ""
        raise SolverError(
            f"Sistema tridiagonal sem dominancia diagonal estrita no no {node}{where}: "
            f"|b|={abs(diag[row])}, |a|+|c|={off[row]}. Verifique alpha >= epsilon0 "
            "e sigma^2 >= lambda ou refine a grade.",
            node=node,
        )


def solve_tridiag(lower, diag, upper, rhs) -> np.ndarray:
    """
    Solve a tridiagonal system with the Thomas algorithm (no pivoting).

    Parameters
    ----------
    lower : ndarray
        Sub-diagonal as a length n array (0, a_2, ..., a_n); lower[0] is ignored.
    diag : ndarray
        Main diagonal (b_1, ..., b_n).
    upper : ndarray
        Super-diagonal (c_1, ..., c_{n-1}, 0); upper[-1] is ignored.
    rhs : ndarray
        Right hand side.

    Returns
    -------
    x : ndarray
        Solution vector of length n.
    """
    lower = np.asarray(lower, dtype=float)
    b = np.array(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = np.array(rhs, dtype=float)
    n = len(d)

    for k in range(1, n):
        if b[k - 1] == 0.0:
            raise SolverError(f"Pivo nulo na linha {k - 1}.", node=k - 1)
        m = lower[k] / b[k - 1]
        b[k] = b[k] - m * upper[k - 1]
        d[k] = d[k] - m * d[k - 1]

    if b[-1] == 0.0:
        raise SolverError(f"Pivo nulo na linha {n - 1}.", node=n - 1)
    x = b
    x[-1] = d[-1] / b[-1]
    for k in range(n - 2, -1, -1):
        x[k] = (d[k] - upper[k] * x[k + 1]) / b[k]
    return x
