import sys


def pytest_terminal_summary(terminalreporter):
    for mod in list(sys.modules.values()):
        lines = getattr(mod, "summary_lines", None)
        if callable(lines) and hasattr(mod, "ACCEPTANCE_RESULTS"):
            if not any(mod.ACCEPTANCE_RESULTS.values()):
                return
            terminalreporter.section("acceptance criteria")
            for line in lines():
                terminalreporter.write_line(line)
            return
