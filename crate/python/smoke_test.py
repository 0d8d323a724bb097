"""Smoke test for the Python bindings.

Build and install first:
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/vorace_py-*.whl
"""

from fractions import Fraction

import vorace_py as v


def main():
    assert v.gen_fun_coeff(4, 2, 3) == 3
    assert v.t_p_paper(3, 4, "0.8", variant="example") == Fraction(1664, 1728)
    assert v.t_p_paper(3, 4, Fraction(4, 5), variant="model") == Fraction(112, 125)
    assert v.t_p_oracle(3, 4, 0.8) == Fraction(112, 125)
    assert abs(float(v.t_p_binary(50, "0.6")) - 0.902193) < 1e-6
    assert v.mu_pid(1, 2, "1/2") == Fraction(1, 4)
    assert v.overlap_bound(3, 2, "0.7", "0.7") == Fraction(7, 10)
    assert v.t_hetero(["0.8"] * 3, 4) == Fraction(112, 125)
    assert "MISMATCH" in v.audit(3, 4, "0.8")

    profile = v.Profile([[0, 3, 1, 2], [3, 1, 2, 0], [0, 3, 1, 2]])
    assert (profile.n, profile.m) == (3, 4)
    borda = profile.elect("borda")
    assert borda["winner"] == 3 and borda["rule_scores"] == [6, 4, 1, 7]
    assert profile.elect("plurality")["winner"] == 0
    assert profile.elect("kemeny")["consensus"] == [0, 3, 1, 2]
    assert v.Profile.from_json(profile.to_json()).rankings == profile.rankings

    scores = [[0.4, 0.2, 0.1, 0.3], [0.1, 0.3, 0.2, 0.4], [0.4, 0.2, 0.1, 0.3]]
    assert v.aggregate_scores(scores, "sum")["winner"] == 3

    try:
        profile.elect("veto")
    except ValueError as e:
        assert "valid rules" in str(e)
    else:
        raise AssertionError("unknown rule accepted")

    sim = v.simulate(n=3, m=4, trials=50_000, seed=1, p=0.8)
    assert abs(sim["rate"] - 0.896) < 4 * sim["stderr"]
    assert sim == v.simulate(n=3, m=4, trials=50_000, seed=1, p=0.8)

    iris = v.Dataset.bundled("iris")
    assert len(iris) == 150 and iris.class_counts == [50, 50, 50]
    report = iris.evaluate(n=11, folds=5, seed=3)
    assert len(report["fold_f1"]) == 5 and 0.8 < report["mean"] <= 1.0

    print("python smoke test passed")


if __name__ == "__main__":
    main()
