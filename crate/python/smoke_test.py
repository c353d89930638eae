"""Smoke test for the zslen_py extension module.

Build the extension first, then run this file directly:

    cargo build -p zslen-py --release
    python3 python/smoke_test.py
"""

import importlib.util
import pathlib
import sys


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libzslen_py.so", "zslen_py.so", "libzslen_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("zslen_py", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("zslen_py extension not found; run `cargo build -p zslen-py` first")


def main():
    z = load_module()

    assert z.davenport("C6") == 6
    assert z.davenport("C2^3") == 4

    assert z.lengths("C6", "[1]^6 [5]^6") == [2, 6]
    assert z.lengths("C6", "[1]^7 [5]^7") == [3, 7]

    atoms = z.atoms("C6", "[1] [5]")
    assert atoms == ["[1]^1 [5]^1", "[5]^6", "[1]^6"]
    assert len(z.atoms("C5")) == 14

    zs = z.factorizations("C3", "[1]^3 [2]^3")
    assert sorted(map(sorted, zs)) == [
        ["[1]^1 [2]^1"] * 3,
        sorted(["[1]^3", "[2]^3"]),
    ]

    report = z.classify("C6", "[1]^7 [5]^7", d=[1])
    assert report["lengths"] == [3, 7]
    assert report["form"]["variant"] == "AAP"

    assert z.rho("C5", k=2) == 5
    assert z.delta("C4", bound=8) == [1, 2]
    assert z.delta_star("C5", bound=12) == [1, 3]

    system = z.system("C2", bound=6)
    assert all(len(l) == 1 for l in system)

    cmp = z.compare("C3", "C2^2", bound=10)
    assert cmp["equal"] is True

    assert "prop3.2" in z.suites()
    suite = z.verify("prop3.6.2", k=1)
    assert suite["pass"] is True
    assert all(case["pass"] for case in suite["cases"])

    try:
        z.lengths("C6", "not a sequence")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed sequence must raise ValueError")

    print("smoke test: all assertions passed")


if __name__ == "__main__":
    main()
