"""Smoke test for the Python bindings.

Build first with ``cargo build -p spinboson-py --release`` (or without
``--release``); the script loads the shared library straight from target/.
"""

import cmath
import importlib.machinery
import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libspinboson_py.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("spinboson_py", str(lib))
            spec = importlib.util.spec_from_loader("spinboson_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("libspinboson_py.so not found; run `cargo build -p spinboson-py` first")


def main():
    sb = load()

    # g/gamma = 0.4, lambda = 1: x = (4/3) e^{-0.2 t} - (1/3) e^{-0.8 t}
    for t in (0.0, 0.5, 3.0):
        expect = 4 / 3 * math.exp(-0.2 * t) - math.exp(-0.8 * t) / 3
        assert abs(sb.closed_form_x(0.4, 1.0, 1.0, t) - expect) < 1e-13

    times, values = sb.solve_expsum([(0.4, 1.0, 0.0)], 1.0, 10.0, 101)
    assert len(times) == 101 and values[0] == 1
    assert max(abs(v - sb.closed_form_x(0.4, 1.0, 1.0, t)) for t, v in zip(times, values)) < 1e-8

    g = sb.moments([(0.5, 2.0, 1.0)], 2)
    nu = complex(2.0, 1.0)
    for k, gk in enumerate(g):
        assert cmath.isclose(gk, (-1) ** k * 0.25 / nu ** (k + 1), rel_tol=1e-13)

    p, r = sb.pole_residue_series([(0.4, 1.0, 0.0)], 3)
    assert abs(p[3] + 5 * 0.16**4) < 1e-15
    assert abs(r[3] - 10 * 0.16**3) < 1e-15

    asym, exact = sb.tstar(0.4, 1.0, 1.0)
    assert abs(asym - 1.0) < 1e-14
    assert abs(exact - math.log(4 / 3) / 0.2) < 1e-12

    assert abs(50 * sb.dawson(50.0) - 0.5 - 1.0006e-4) < 1e-7

    (files,) = sb.run_scenario(preset="figure1")
    assert {"exact.csv", "pert.csv", "pert-uncorrected.csv", "manifest.txt"} <= set(files)
    assert files["exact.csv"].splitlines()[0].startswith("gamma_t,value_re")

    try:
        sb.run_scenario(toml_text="outputs = []")
    except ValueError as err:
        assert "kernel" in str(err)
    else:
        raise AssertionError("invalid scenario accepted")

    print("python bindings OK")


if __name__ == "__main__":
    main()
