#!/usr/bin/env python3
"""Record contract fixtures from a live project service.

Starts the real service over a scratch project fed with the repository's
sample data, replays a fixed set of console requests against it, and stores
request/response pairs under tests/fixtures/. The console's contract tests
replay these without a network; re-run this script after changing the
service to refresh them.

Usage: python3 tools/record_fixtures.py
"""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"
REPO = HERE.parent.parent
SAMPLE = REPO / "tests" / "fixtures"
PORT = 8311
BASE = f"http://127.0.0.1:{PORT}"

# One judgment set per case over the default criteria; pairs are listed in
# wizard order (P vs A, P vs U, A vs U) as (value, favors). Covers perfect
# consistency, mild strain, hard rejections, the all-equal set, and the
# deliberately cyclic set.
CASES = [
    ("all_equal", [(1, "equal"), (1, "equal"), (1, "equal")]),
    ("cyclic_3", [(3, "first"), (3, "second"), (3, "first")]),
    ("panel_ux", [(3, "second"), (4, "second"), (2, "second")]),
    ("panel_dev", [(5, "first"), (4, "first"), (1, "equal")]),
    ("chain_2x2", [(2, "first"), (4, "first"), (2, "first")]),
    ("near_consistent", [(3, "first"), (5, "first"), (2, "first")]),
    ("mild_reversed", [(2, "second"), (2, "second"), (1, "equal")]),
    ("strong_chain", [(5, "first"), (5, "first"), (5, "first")]),
    ("tied_top", [(1, "equal"), (3, "first"), (3, "first")]),
    ("contradiction", [(4, "second"), (2, "first"), (5, "second")]),
    ("doubling", [(2, "first"), (2, "second"), (4, "second")]),
    ("middle_anchor", [(3, "first"), (1, "equal"), (3, "second")]),
    ("stretch_45", [(4, "first"), (5, "first"), (2, "first")]),
    ("tail_equal", [(5, "second"), (5, "second"), (1, "equal")]),
    ("soft_chain", [(2, "first"), (3, "first"), (2, "first")]),
    ("lean_four", [(3, "first"), (4, "first"), (1, "equal")]),
    ("cancel_out", [(5, "first"), (1, "equal"), (5, "second")]),
    ("double_back", [(4, "second"), (4, "second"), (2, "first")]),
    ("skew_low", [(2, "second"), (5, "second"), (3, "second")]),
    ("half_turn", [(5, "first"), (2, "second"), (5, "second")]),
]

PAIR_NAMES = [
    ("performance", "accessibility"),
    ("performance", "usability"),
    ("accessibility", "usability"),
]


def call(method, path, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(
        BASE + path,
        data=data,
        method=method,
        headers={"content-type": "application/json"} if data else {},
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def wait_up(deadline=15.0):
    start = time.monotonic()
    while time.monotonic() - start < deadline:
        try:
            status, _ = call("GET", "/api/project")
            if status == 200:
                return
        except (urllib.error.URLError, ConnectionError):
            time.sleep(0.25)
    raise RuntimeError("service did not come up")


def run_cli(project, *args):
    subprocess.run(
        [
            "wuiq", "--project", str(project),
            "--now", "2026-08-22T00:00:00+00:00",
            *args,
        ],
        check=True,
        capture_output=True,
    )


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    workdir = pathlib.Path(tempfile.mkdtemp(prefix="wuiq-record-"))
    project = workdir / "proj"
    server = None
    try:
        run_cli(project, "init", "--id", "console-fixture")
        run_cli(project, "ingest", "surveys", str(SAMPLE / "surveys.json"))
        run_cli(project, "ingest", "experts", str(SAMPLE / "experts.json"))
        run_cli(project, "ingest", "lighthouse", str(SAMPLE / "lighthouse.json"))
        run_cli(project, "weights")
        run_cli(project, "evaluate")
        run_cli(project, "segment")
        run_cli(project, "explain", "--cluster", "0")
        run_cli(project, "explain", "--cluster", "1")

        server = subprocess.Popen(
            ["wuiq", "--project", str(project), "serve", "--listen", f"127.0.0.1:{PORT}"],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        wait_up()

        preview_cases = []
        for name, selections in CASES:
            judgments = [
                {"first": first, "second": second, "value": value, "favors": favors}
                for (first, second), (value, favors) in zip(PAIR_NAMES, selections)
            ]
            status, body = call("POST", "/api/experts/preview", {"judgments": judgments})
            if status != 200:
                raise RuntimeError(f"preview {name} returned {status}: {body}")
            preview_cases.append(
                {"name": name, "request": {"judgments": judgments}, "response": body}
            )
        (FIXTURES / "preview_cases.json").write_text(
            json.dumps(preview_cases, indent=1, sort_keys=True) + "\n"
        )

        _, questionnaire = call("GET", "/api/questionnaire")
        (FIXTURES / "questionnaire.json").write_text(
            json.dumps(questionnaire, indent=1, sort_keys=True) + "\n"
        )

        _, report = call("GET", "/api/report")
        (FIXTURES / "report.json").write_text(
            json.dumps(report, indent=1, sort_keys=True) + "\n"
        )

        bad = {
            "surveys": [
                {
                    "respondent_id": "bad-item",
                    "items": [4, 3, 3, 3, 9, 3, 4, 2, 3, 3, 5, 5, 5, 5, 5, 5, 5],
                    "review_text": "fine otherwise",
                    "duration_months": 2,
                }
            ]
        }
        status, body = call("POST", "/api/surveys", bad)
        if status != 400:
            raise RuntimeError(f"expected 400 for the bad survey, got {status}")
        (FIXTURES / "survey_rejection.json").write_text(
            json.dumps({"status": status, "body": body}, indent=1, sort_keys=True) + "\n"
        )

        print(f"recorded {len(preview_cases)} preview cases plus questionnaire,")
        print(f"report, and survey rejection into {FIXTURES}")
    finally:
        if server is not None:
            server.terminate()
            server.wait(timeout=10)
        shutil.rmtree(workdir, ignore_errors=True)


if __name__ == "__main__":
    sys.exit(main())
