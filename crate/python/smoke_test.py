"""Smoke test for the norbury_py extension.

Build first:  cargo build --release -p norbury-py
then run:     python3 python/smoke_test.py
"""
import glob
import os
import shutil
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))


def load():
    try:
        import norbury_py
        return norbury_py
    except ImportError:
        pass
    root = os.path.dirname(HERE)
    libs = glob.glob(os.path.join(root, "target", "*", "libnorbury_py.so")) + glob.glob(
        os.path.join(root, "target", "*", "libnorbury_py.dylib"))
    if not libs:
        sys.exit("norbury_py not built; run cargo build --release -p norbury-py")
    tmp = tempfile.mkdtemp()
    shutil.copy(max(libs, key=os.path.getmtime), os.path.join(tmp, "norbury_py.so"))
    sys.path.insert(0, tmp)
    import norbury_py
    return norbury_py


def main():
    nb = load()
    rep = nb.Representation.build("N12", [1.0])
    r = nb.sum_identity(rep, 18.0)
    assert abs(r["value"] - 0.5) < 1e-3, r
    print("N12 identity", r["value"], "terms", r["term_count"])

    n21 = nb.Representation.build("N21", [1.0, 1.5])
    bent = n21.bend("ab", 0.1j)
    r = nb.sum_identity(bent, 18.0)
    assert abs(r["value"] - 0.5) < 2e-3 and abs(r["value"].imag) < 1e-3, r
    print("N21 bent identity", r["value"])

    again = nb.Representation.from_json(bent.to_json())
    assert abs(nb.sum_identity(again, 12.0)["value"] - nb.sum_identity(bent, 12.0)["value"]) < 1e-12

    pairs = nb.enumerate_pairs(n21, 8.0)
    assert pairs and {"kind", "alpha", "beta", "parity"} <= set(pairs[0])
    print("N21 pairs up to 8:", len(pairs))

    s, expected = nb.full_circle_width(bent, 18.0)
    assert abs(s - expected) < 1e-3
    b = nb.bordered_identity(nb.Representation.bordered(1.0, 0.5))
    assert abs(b["value"] - 0.5) / 0.5 < 1e-2
    d = nb.norbury_d_hat(1e-6, 1.0, 1.0)
    assert abs(d - 2 / (2.718281828459045 + 1)) < 1e-4
    print("smoke test passed")


if __name__ == "__main__":
    main()
