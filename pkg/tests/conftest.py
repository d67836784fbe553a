import sys

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in acceptance.TITLES.items():
        parts = acceptance.RESULTS.get(number)
        if parts is None:
            terminalreporter.write_line(f"criterion {number} ({title}): NOT RUN")
            continue
        ok = all(p[0] for p in parts)
        seconds = sum(p[1] for p in parts)
        notes = [p[2] for p in parts if p[2]]
        heads = "; ".join(n.splitlines()[0] for n in notes)
        line = f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'} [{seconds:.1f}s]"
        terminalreporter.write_line(line + (f" {heads}" if heads else ""))
        if not ok:
            for n in notes:
                for extra in n.splitlines()[1:]:
                    terminalreporter.write_line(f"    {extra}")
