import csv
import json

from specgrad.cli import main


def test_gen_then_solve(tmp_path):
    problem = tmp_path / "tp1.json"
    trace = tmp_path / "run.csv"
    assert main(["gen", "--family", "TP1", "--n", "50", "--kappa", "100",
                 "--seed", "3", "--out", str(problem)]) == 0
    desc = json.loads(problem.read_text())
    assert desc["kind"] == "diag" and desc["family"] == "TP1"

    rc = main([
        "solve", "--problem", str(problem), "--strategy", "news",
        "--h", "4", "--s", "6", "--eps", "1e-9", "--seed", "1", "--out", str(trace),
    ])
    assert rc == 0
    with open(trace) as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"k", "f", "gnorm", "alpha", "branch"}
    assert float(rows[-1]["gnorm"]) <= 1e-9 * float(rows[0]["gnorm"])


def test_solve_unknown_strategy(tmp_path, capsys):
    problem = tmp_path / "p.json"
    main(["gen", "--family", "TP1", "--n", "10", "--out", str(problem)])
    rc = main(["solve", "--problem", str(problem), "--strategy", "bogus",
               "--out", str(tmp_path / "t.csv")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 1


def test_malformed_plan(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text("{\"problems\": []}")
    rc = main(["bench", "--plan", str(plan), "--out", str(tmp_path / "r.csv")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_bench_and_profile(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({
        "problems": [{"family": "TP1", "n": 30, "kappa": 50.0, "seeds": [1, 2]}],
        "strategies": [{"method": "SD"}, {"method": "NEWS", "h": 2, "s": 2}],
        "tolerances": [1e-6],
        "iter_cap": 5000,
    }))
    results = tmp_path / "results.csv"
    summary = tmp_path / "summary.csv"
    rc = main(["bench", "--plan", str(plan), "--out", str(results),
               "--summary-out", str(summary), "--threads", "2"])
    assert rc == 0
    with open(results) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4

    prof = tmp_path / "prof.csv"
    rc = main(["profile", str(results), "--metric", "iterations", "--out", str(prof)])
    assert rc == 0
    with open(prof) as fh:
        prows = list(csv.DictReader(fh))
    assert {r["solver"] for r in prows} == {"SD", "NEWS(2,2)"}
    for solver in ("SD", "NEWS(2,2)"):
        rhos = [float(r["rho"]) for r in prows if r["solver"] == solver]
        assert rhos == sorted(rhos)
        assert rhos[-1] == 1.0


def test_profile_no_rows(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("family,kappa,eps,method,h,s,seed,iters,func_evals,termination\n")
    rc = main(["profile", str(empty), "--out", str(tmp_path / "p.csv")])
    assert rc == 1


def test_solve_with_retained_gradients(tmp_path):
    problem = tmp_path / "p.json"
    main(["gen", "--family", "SET1", "--n", "40", "--kappa", "100", "--out", str(problem)])
    rc = main(["solve", "--problem", str(problem), "--strategy", "AOPT",
               "--eps", "1e-8", "--retain-gradients", "--out", str(tmp_path / "t.csv")])
    assert rc == 0


def test_diag_series(tmp_path):
    problem = tmp_path / "tp1.json"
    main(["gen", "--family", "TP1", "--n", "200", "--seed", "5", "--out", str(problem)])
    out = tmp_path / "diag.csv"
    rc = main(["diag", "--problem", str(problem), "--strategy", "AOPT",
               "--max-iter", "120", "--out", str(out)])
    assert rc == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"k", "bar_alpha", "hat_alpha"}
    assert int(rows[0]["k"]) == 2
    assert len(rows) >= 100


def test_gen_laplace(tmp_path):
    out = tmp_path / "lap.json"
    assert main(["gen", "--kind", "laplace3d", "--variant", "B", "--N", "4",
                 "--out", str(out)]) == 0
    desc = json.loads(out.read_text())
    assert desc == {"kind": "laplace3d", "variant": "B", "N": 4}


def test_gen_requires_family_or_kind(tmp_path):
    assert main(["gen", "--out", str(tmp_path / "x.json")]) == 1
