def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance tests record one human-readable line each; echo them in a
    # summary block so they are visible even with output capture enabled
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance gate")
        for line in lines:
            terminalreporter.write_line(line)
