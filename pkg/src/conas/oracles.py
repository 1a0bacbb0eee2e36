"""Ground-truth evaluators: planted expansions, random decision trees, noise, tables."""
from __future__ import annotations

import numpy as np

from .fourier import FourierExpansion, all_encodings, enumerate_parities, evaluate_many
from .validation import check_encoding


class FunctionEvaluator:
    """Adapter turning a plain callable over encodings into an evaluator."""

    def __init__(self, fn, n: int, thread_safe: bool = False):
        self.fn = fn
        self.n = int(n)
        self.thread_safe = bool(thread_safe)

    def evaluate(self, alpha) -> float:
        return float(self.fn(check_encoding(alpha, self.n)))


class PlantedOracle:
    """Evaluator backed by an explicit sparse parity expansion (the ground truth)."""

    thread_safe = True

    def __init__(self, expansion: FourierExpansion):
        self.expansion = expansion
        self.n = expansion.n

    def evaluate(self, alpha) -> float:
        return self.expansion.evaluate(alpha)

    def evaluate_batch(self, X) -> np.ndarray:
        return self.expansion.evaluate_batch(X)


def make_planted(
    n: int,
    sparsity: int,
    degree: int,
    magnitude_range: tuple[float, float] = (1.0, 2.0),
    seed=None,
) -> PlantedOracle:
    """Plant a random expansion: distinct non-constant parities, signed magnitudes.

    Parities are drawn uniformly without replacement from all non-constant
    parities of degree <= degree; coefficient magnitudes are uniform in the
    given range with uniform random signs.  sparsity = 0 plants the zero
    function.
    """
    if sparsity < 0:
        raise ValueError("sparsity must be nonnegative")
    candidates = enumerate_parities(n, degree)[1:]
    if sparsity > len(candidates):
        raise ValueError(
            f"cannot plant {sparsity} terms: only {len(candidates)} "
            f"non-constant parities of degree <= {degree} exist"
        )
    lo, hi = float(magnitude_range[0]), float(magnitude_range[1])
    if not 0 < lo <= hi:
        raise ValueError("magnitude range must satisfy 0 < lo <= hi")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(candidates), size=sparsity, replace=False)
    magnitudes = rng.uniform(lo, hi, size=sparsity)
    signs = rng.integers(0, 2, size=sparsity) * 2 - 1
    terms = {
        candidates[int(k)]: float(mag * sign)
        for k, mag, sign in zip(chosen, magnitudes, signs)
    }
    return PlantedOracle(FourierExpansion(n, terms))


class DecisionTreeOracle:
    """Complete binary decision tree; internal nodes test one coordinate's sign.

    A node is either a float leaf or a (coordinate, low, high) triple where
    low is taken on -1 and high on +1.  Every root-to-leaf path tests distinct
    coordinates.
    """

    thread_safe = True

    def __init__(self, n: int, root, depth: int):
        self.n = int(n)
        self.root = root
        self.depth = int(depth)

    def evaluate(self, alpha) -> float:
        alpha = check_encoding(alpha, self.n)
        node = self.root
        while not isinstance(node, float):
            coordinate, low, high = node
            node = high if alpha[coordinate] > 0 else low
        return node


def make_decision_tree(n: int, depth: int, seed=None) -> DecisionTreeOracle:
    """Random complete tree of the given depth with standard-normal leaves."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if not 0 <= depth <= n:
        raise ValueError(f"depth must lie in [0, {n}], got {depth}")
    rng = np.random.default_rng(seed)

    def build(available: list[int], remaining: int):
        if remaining == 0:
            return float(rng.standard_normal())
        coordinate = available[int(rng.integers(len(available)))]
        rest = [c for c in available if c != coordinate]
        low = build(rest, remaining - 1)
        high = build(rest, remaining - 1)
        return (coordinate, low, high)

    return DecisionTreeOracle(n, build(list(range(n)), depth), depth)


class NoisyEvaluator:
    """Adds Gaussian noise per call; draw k depends only on (seed, k).

    Reruns therefore reproduce exactly.  The call index is a shared counter,
    so the wrapper is not thread safe.
    """

    thread_safe = False

    def __init__(self, base, sigma: float, seed: int):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.base = base
        self.sigma = float(sigma)
        self.seed = int(seed)
        self.n = base.n
        self._calls = 0

    def _noise(self, index: int) -> float:
        if self.sigma == 0.0:
            return 0.0
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, index]))
        return self.sigma * float(rng.standard_normal())

    def evaluate(self, alpha) -> float:
        index = self._calls
        self._calls += 1
        return float(self.base.evaluate(alpha)) + self._noise(index)

    def evaluate_batch(self, X) -> np.ndarray:
        values = evaluate_many(self.base, X)
        start = self._calls
        self._calls += len(values)
        noise = np.array([self._noise(start + k) for k in range(len(values))])
        return values + noise


def wrap_noise(f, sigma: float, seed: int) -> NoisyEvaluator:
    return NoisyEvaluator(f, sigma, seed)


class TabularOracle:
    """Evaluator backed by an explicit encoding-to-value table.

    Missing keys either raise (policy "error") or return a configured penalty
    value.
    """

    thread_safe = True

    def __init__(self, n: int, table: dict[str, float], missing="error"):
        if missing != "error":
            missing = float(missing)
        self.n = int(n)
        self.table = dict(table)
        self.missing = missing

    def _key(self, alpha) -> str:
        alpha = check_encoding(alpha, self.n)
        return "".join("1" if b > 0 else "0" for b in alpha)

    def evaluate(self, alpha) -> float:
        key = self._key(alpha)
        if key in self.table:
            return self.table[key]
        if self.missing == "error":
            raise KeyError(f"encoding {key} not present in the table")
        return self.missing


def load_tabular(path, missing="error") -> TabularOracle:
    """Read a CSV table with header `encoding,value`.

    Encodings are strings over {0, 1} with 0 mapping to -1 and 1 to +1.
    Parsing is bit-exact: no whitespace tolerance beyond a trailing newline,
    and duplicate or width-inconsistent encodings are rejected with their line
    number.
    """
    with open(path, "r", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "encoding,value":
        raise ValueError("line 1: header must be exactly 'encoding,value'")
    width = None
    table: dict[str, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'encoding,value'")
        enc, raw = parts
        if not enc or any(ch not in "01" for ch in enc):
            raise ValueError(f"line {lineno}: encoding must be a nonempty string over 0/1")
        if width is None:
            width = len(enc)
        elif len(enc) != width:
            raise ValueError(f"line {lineno}: encoding width {len(enc)} != {width}")
        if raw == "" or raw != raw.strip():
            raise ValueError(f"line {lineno}: malformed value {raw!r}")
        try:
            value = float(raw)
        except ValueError:
            raise ValueError(f"line {lineno}: malformed value {raw!r}") from None
        if enc in table:
            raise ValueError(f"line {lineno}: duplicate encoding {enc}")
        table[enc] = value
    if width is None:
        raise ValueError("table has no rows")
    return TabularOracle(width, table, missing)


def save_tabular(f, path) -> None:
    """Dump an evaluator's full 2**n table in the load_tabular CSV format."""
    n = f.n
    X = all_encodings(n)
    values = evaluate_many(f, X)
    with open(path, "w", newline="") as fh:
        fh.write("encoding,value\n")
        for row, value in zip(X, values):
            bits = "".join("1" if b > 0 else "0" for b in row)
            fh.write(f"{bits},{float(value)!r}\n")
