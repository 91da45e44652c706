"""Shared pytest hooks: print a visible pass/fail line for every acceptance
criterion, independent of output capturing."""

import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    label = getattr(item.function, "criterion", None)
    if label:
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"\n[{label}] {verdict}", flush=True)
