"""Built-in examples that need no input files."""

import logfire

from skelpair.pairing import DemoReport, counterexample_demo, d1_demo
from skelpair.registry import action, all_action


@action("counterexample")
def counterexample(*, n: int) -> DemoReport:
    """
    Exact pairing of the triangle-wave triple on I^2 at level n; the closed form is 2n.

    :param n: Level of the triangle wave (n >= 1).
    """
    if n < 1:
        raise SystemExit("--n must be positive")
    return counterexample_demo([n])


@action("d1-fakt")
def d1_fakt(*, n: int = 8, seed: int = 0, count: int = 100) -> DemoReport:
    """
    Exact d=1 pairings of random piecewise-affine pairs against -int (D f0)(D f1).

    :param n: Largest level of the random grids.
    :param seed: Random seed.
    :param count: Number of random pairs.
    """
    if n < 1 or count < 1:
        raise SystemExit("--n and --count must be positive")
    return d1_demo(n=n, seed=seed, count=count)


@all_action
def all() -> int:
    """Run both demos and check every row against its closed form."""
    failures = 0
    report = counterexample_demo(range(1, 9))
    if report.exit_code == 0:
        logfire.info("✓ triangle-wave triple pairs to 2n for n = 1..8")
    else:
        failures += 1
        logfire.error(f"triangle-wave pairings: {[r.value for r in report.rows]}")
    report = d1_demo()
    if report.exit_code == 0:
        logfire.info(f"✓ d=1 exact pairing equals -int D f0 D f1 on {len(report.rows)} random pairs")
    else:
        failures += 1
        logfire.error(f"d=1 demo: {sum(not r.passed for r in report.rows)} mismatches")
    return 1 if failures else 0
