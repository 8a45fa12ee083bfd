# filled by test_acceptance.py: criterion number -> (passed, [(clause, ok, detail)])
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, clauses = ACCEPTANCE[k]
        terminalreporter.write_line(f"ACCEPTANCE criterion {k}: {'PASS' if ok else 'FAIL'}")
        for name, good, detail in clauses:
            if not good:
                terminalreporter.write_line(f"    failed clause: {name}" + (f" ({detail})" if detail else ""))
