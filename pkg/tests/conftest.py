from d2dframe.channel import LINKS, SERVES, LinkGains, SystemParams


def make_gains(direct=1.0, cross=0.0, noise=1.0, **over):
    """LinkGains with every link set to ``cross`` except the served links.

    Keyword overrides use ``TX_RX`` names, e.g. ``MBS_DRX=0.5``.
    """
    g = {}
    for (t, r) in LINKS:
        g[(t, r)] = direct if SERVES.get(t) == r else cross
    for k, v in over.items():
        t, r = k.split("_")
        g[(t, r)] = v
    return LinkGains(g, {l: 1.0 for l in LINKS}, noise)


def unit_params(**kw):
    base = dict(p_max_dtx=1.0, p_max_mbs=1.0, p_max_fap=1.0, p_max_cue=1.0,
                sinr_min_drx=1.0, sinr_min_cue=1.0, sinr_min_fue=1.0)
    base.update(kw)
    return SystemParams(**base)


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
