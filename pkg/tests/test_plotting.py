from extremal_dare.afpi import afpi_run
from extremal_dare.builtin import builtin_example
from extremal_dare.iterations import IterationOptions, fpi_run, stein_initial
from extremal_dare.plotting import plot_convergence


def test_plot_writes_png(tmp_path):
    ex = builtin_example("ex1")
    x0 = stein_initial(ex.problem, ex.feedback)
    reports = {"afpi": afpi_run(ex.problem, x0, 2, IterationOptions()),
               "fpi": fpi_run(ex.problem, x0, IterationOptions())}
    out = plot_convergence(reports, str(tmp_path / "c.png"), title="ex1")
    data = open(out, "rb").read()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_empty(tmp_path):
    out = plot_convergence({}, str(tmp_path / "e.png"))
    assert open(out, "rb").read(4) == b"\x89PNG"
