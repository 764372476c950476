"""End-to-end checks of the grdf command line: exit codes, CSV headers,
summary schema and worker-count determinism."""

import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema

HEADERS = {
    "probe-env": "x,t,u,open,w",
    "simulate-path": "x,t",
    "renewals": "trial,seed,j,T_j,position,gap,max_displacement",
    "coalescence-tail": "trial,seed,m,theta,nu,T_nu,sign_changes,theta_censored,nu_censored",
    "crossings": "trial,seed,m,theta,nu,T_nu,sign_changes,theta_censored,nu_censored",
    "constants": "trial,seed,T1,increment",
    "distance-preserved": "m,trial,seed,preserved",
    "condition-b": "t,eps,k,half_width,trials,successes,estimate,stderr,scaled,low_sample",
    "condition-e": "width,trial,seed,lattice_time,lattice_width,eta",
    "condition-t": "t,lattice_rho,lattice_time,trials,successes,estimate,stderr,ratio,ratio_stderr,low_sample",
    "eta": "trial,t0,t,a,b,eta",
    "metric-distance": "trial,seed,m,distance",
    "moment-stability": "trial,seed,T1,max_displacement",
    "overshoot": "m,trials,hits,censored,mean,stderr",
}

SCALE = {"gamma": 2.66, "sigma": 0.92}

# Small but valid configs, one per experiment.
CONFIGS = {
    "probe-env": {"trials": 1},
    "simulate-path": {"trials": 1, "horizon": 200},
    "renewals": {"trials": 200},
    "coalescence-tail": {"trials": 2000, "geometry": {"k_min": 10, "k_max": 1000}},
    "crossings": {"trials": 2000},
    "constants": {"trials": 2000},
    "distance-preserved": {"trials": 500},
    "condition-b": {"trials": 200, "geometry": {"k_grid": [10, 100], "m_grid": [1, 2]}},
    "condition-e": {"trials": 100, "n": 20, "geometry": SCALE},
    "condition-t": {"trials": 50, "n": 10, "geometry": SCALE},
    "eta": {"trials": 100, "geometry": {"t": 20, "a": -2, "b": 2}},
    "metric-distance": {"trials": 50, "horizon": 200, "geometry": dict(SCALE, m=2)},
    "moment-stability": {"trials": 2000},
    "overshoot": {"trials": 300, "geometry": {"m_grid": [1, 2, 3]}},
}

failures = []


def check(ok, what):
    if not ok:
        failures.append(what)
        print("FAIL", what)


def run(exe, out, name, cfg, *flags):
    path = out / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return subprocess.run([exe, cfg.get("experiment", name.split(".")[0]), "--config", str(path), *flags],
                          capture_output=True, text=True)


def base(experiment, **extra):
    cfg = {"experiment": experiment, "env": {"p": 0.5, "w_pmf": [0.5, 0.5], "seed": 2024}}
    cfg.update(extra)
    return cfg


def main():
    exe, schema_path, out = sys.argv[1], sys.argv[2], Path(sys.argv[3])
    out.mkdir(parents=True, exist_ok=True)
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft7Validator.check_schema(schema)
    validator = jsonschema.Draft7Validator(schema)

    check(set(CONFIGS) == set(HEADERS), "every experiment has a config")
    for experiment, extra in CONFIGS.items():
        outputs = []
        for workers in (1, 8):
            prefix = out / f"{experiment}.w{workers}"
            cfg = base(experiment, out_prefix=str(prefix), **extra)
            r = run(exe, out, f"{experiment}.w{workers}", cfg, "--workers", str(workers))
            check(r.returncode == 0, f"{experiment} exits 0 (got {r.returncode}: {r.stderr.strip()})")
            if r.returncode != 0:
                break
            outputs.append((Path(f"{prefix}.csv").read_bytes(), Path(f"{prefix}.summary.json").read_bytes()))
        if len(outputs) != 2:
            continue
        (csv_bytes, summary_bytes), other = outputs
        check(outputs[0] == other, f"{experiment} outputs match across worker counts")

        text = csv_bytes.decode("utf-8")
        check("\r" not in text and text.endswith("\n"), f"{experiment} CSV uses LF endings")
        rows = list(csv.reader(io.StringIO(text)))
        check(",".join(rows[0]) == HEADERS[experiment], f"{experiment} CSV header")
        check(all(len(row) == len(rows[0]) for row in rows), f"{experiment} CSV rows match header width")
        if experiment == "probe-env":
            check(len(rows) == 11, "probe-env dumps 10 sites")

        summary = json.loads(summary_bytes)
        errors = [e.message for e in validator.iter_errors(summary)]
        check(not errors, f"{experiment} summary validates: {errors[:3]}")
        check(summary["experiment"] == experiment, f"{experiment} summary names the experiment")

    # Flags override the config file.
    prefix = out / "override"
    r = run(exe, out, "renewals.override", base("renewals", trials=5, out_prefix=str(prefix)),
            "--trials", "7", "--seed", "99", "--p", "0.4")
    check(r.returncode == 0, "override run exits 0")
    summary = json.loads(Path(f"{prefix}.summary.json").read_text())
    check(summary["config"]["trials"] == 7, "--trials wins over the config")
    check(summary["config"]["env"]["seed"] == 99, "--seed wins over the config")
    check(summary["config"]["env"]["p"] == 0.4, "--p wins over the config")

    # Config errors exit 2 and name the field.
    bad = {
        "trials": base("renewals", trials=0),
        "horizon": base("renewals", horizon=-3),
        "env.p": base("renewals", env={"p": 2, "w_pmf": [1.0], "seed": 1}),
        "geometry.b": base("eta", geometry={"a": 3, "b": 1}),
        "geometry.bogus": base("renewals", geometry={"bogus": 1}),
        "experiment": base("eta"),
    }
    for field, cfg in bad.items():
        cfg["out_prefix"] = str(out / "bad")
        name = "renewals.bad" if field == "experiment" else f"{cfg['experiment']}.bad"
        if field == "experiment":
            cfg = dict(cfg, experiment="eta")
            path = out / "mismatch.json"
            path.write_text(json.dumps(cfg))
            r = subprocess.run([exe, "renewals", "--config", str(path)], capture_output=True, text=True)
        else:
            r = run(exe, out, name, cfg)
        check(r.returncode == 2, f"bad {field} exits 2 (got {r.returncode})")
        check(field in r.stderr, f"bad {field} is named in the message: {r.stderr.strip()}")

    r = subprocess.run([exe, "renewals", "--config", str(out / "missing.json")], capture_output=True)
    check(r.returncode == 2, "missing config file exits 2")
    r = subprocess.run([exe, "no-such-experiment"], capture_output=True)
    check(r.returncode == 2, "unknown subcommand exits 2")
    r = subprocess.run([exe, "renewals", "--config", str(out / "renewals.w1.json"), "--trials", "x"],
                       capture_output=True)
    check(r.returncode == 2, "malformed flag exits 2")

    # Too little data for a tail fit exits 3.
    r = run(exe, out, "coalescence-tail.tiny",
            base("coalescence-tail", trials=10, horizon=10, out_prefix=str(out / "tiny")))
    check(r.returncode == 3, f"insufficient data exits 3 (got {r.returncode})")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
