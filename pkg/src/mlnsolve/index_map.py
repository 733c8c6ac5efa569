"""Cycle/position index functions.

A global iteration index ``k`` is split as ``k = j*n + i`` with ``1 <= i <= n``;
``g_index`` returns the cycle ``j`` and ``r_index`` the position ``i``.
"""


def _check_block(n: int) -> None:
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")


def g_index(n: int, k: int) -> int:
    """``floor((k - 1) / n)``, rounding toward minus infinity."""
    _check_block(n)
    # Python's // already floors toward -inf, so k = 0 gives -1
    return (k - 1) // n


def r_index(n: int, k: int) -> int:
    """``k - n * g_index(n, k)``, always in ``1..n``."""
    return k - n * g_index(n, k)


def split_index(n: int, k: int) -> tuple[int, int]:
    """Return ``(j, i)`` with ``k = j*n + i``."""
    j = g_index(n, k)
    return j, k - n * j
