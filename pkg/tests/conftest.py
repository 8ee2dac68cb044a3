import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bregman_margin import QuadraticPotential, fixture_four_point

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def four():
    return fixture_four_point()


@pytest.fixture
def ident2():
    return QuadraticPotential.identity(2)


def random_spd(rng, d, cond=20.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    ev = np.exp(rng.uniform(0.0, np.log(cond), d))
    return (Q * ev) @ Q.T


_CRIT = re.compile(r"test_criterion_(\d+)_")


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" and outcome != "error":
                continue
            m = _CRIT.search(getattr(rep, "nodeid", ""))
            if m:
                detail = dict(rep.user_properties).get("detail", "")
                lines[int(m.group(1))] = (rep.nodeid.split("::")[-1],
                                          "PASS" if outcome == "passed" else "FAIL", detail)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        name, verdict, detail = lines[k]
        terminalreporter.write_line(f"criterion {k}: {verdict}  {name}: {detail}")
