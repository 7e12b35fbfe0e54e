# Copyright 2026 The DAR Authors
# SPDX-License-Identifier: Apache-2.0

"""End-to-end checks of the dar command-line tool.

usage: cli_test.py <dar binary> <data dir> <usage|eval|serve>
"""

import json
import os
import re
import shutil
import signal
import subprocess
import sys
import tempfile
import time
import urllib.request


def run(args, **kw):
    return subprocess.run(args, capture_output=True, text=True, timeout=120, **kw)


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)


def build_index(dar, data, work):
    cfg = os.path.join(work, "config.json")
    shutil.copy(os.path.join(data, "config.json"), cfg)
    idx = os.path.join(work, "corpus.idx")
    r = run([dar, "index", "build", os.path.join(data, "captions.txt"), idx,
             "--config", cfg, "--assets", os.path.join(work, "assets")])
    check(r.returncode == 0, "index build: " + r.stderr)
    check(os.path.getsize(idx) > 0, "index file is empty")
    check(os.path.exists(os.path.join(work, "assets", "img", "0.dar")), "asset not written")
    return cfg, idx


def test_usage(dar, data, work):
    r = run([dar, "--no-such-flag"])
    check(r.returncode == 2, "unknown flag should exit 2, got %d" % r.returncode)
    r = run([dar, "eval", "run"])
    check(r.returncode == 2, "missing arguments should exit 2, got %d" % r.returncode)
    r = run([dar, "--help"])
    check(r.returncode == 0 and "eval" in r.stdout, "help")
    r = run([dar, "report", os.path.join(data, "captions.txt")])
    check(r.returncode == 1, "bad report should exit 1, got %d" % r.returncode)
    err = json.loads(r.stderr.split("dar: error: ", 1)[1])
    check(set(err) == {"code", "message", "detail"}, "error envelope: " + r.stderr)


def test_eval(dar, data, work):
    cfg, idx = build_index(dar, data, work)
    out = os.path.join(work, "run.json")
    csv = os.path.join(work, "run.csv")
    r = run([dar, "eval", "run", os.path.join(data, "dataset.json"), idx, cfg,
             "--out", out, "--csv", csv, "--transcripts", os.path.join(work, "tx")])
    check(r.returncode == 0, "eval run: " + r.stderr)
    report = json.load(open(out))
    check(report["k"] == 2 and report["T"] == 2 and report["n"] == 3, "report header")
    names = [v["name"] for v in report["variants"]]
    check(names == ["dar", "concat"], "variants %s" % names)
    for v in report["variants"]:
        c = v["curve"]
        check(len(c) == 3 and all(a <= b for a, b in zip(c, c[1:])), "curve %s" % c)
    check(os.path.exists(os.path.join(work, "tx", "dar", "2.json")), "transcript")
    lines = open(csv).read().splitlines()
    check(lines[0] == "variant,turn,hits_at_k,n" and len(lines) == 7, "csv %s" % lines)

    r2 = run([dar, "eval", "run", os.path.join(data, "dataset.json"), idx, cfg,
              "--variant", "concat", "--k", "3"])
    check(r2.returncode == 0, "eval to stdout: " + r2.stderr)
    check(json.loads(r2.stdout)["k"] == 3, "--k override")

    r3 = run([dar, "report", out, "--csv"])
    check(r3.returncode == 0 and r3.stdout.splitlines() == lines, "report --csv")
    r4 = run([dar, "report", out])
    check(r4.returncode == 0 and "Hits@2 over 3 dialogues" in r4.stdout, "report table")


def test_serve(dar, data, work):
    cfg, idx = build_index(dar, data, work)
    conf = json.load(open(cfg))
    conf["service"]["asset_dir"] = "assets"
    json.dump(conf, open(cfg, "w"))
    proc = subprocess.Popen([dar, "serve", cfg], stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stderr.readline()
        m = re.search(r"http://([\d.]+):(\d+)", line)
        check(m is not None, "no listen line: " + line)
        base = "http://%s:%s" % (m.group(1), m.group(2))
        health = json.load(urllib.request.urlopen(base + "/api/health", timeout=10))
        check(health == {"status": "ok", "corpus_count": 8, "dim": 64}, "health %s" % health)
        req = urllib.request.Request(base + "/api/sessions",
                                     data=json.dumps({"d0": "a dog in a park"}).encode(),
                                     headers={"Content-Type": "application/json"})
        resp = urllib.request.urlopen(req, timeout=10)
        body = json.load(resp)
        check(resp.status == 201 and body["turn0"]["ranking"][0]["id"] == 1, "session %s" % body)
        img = urllib.request.urlopen(base + "/api/corpus/images/1", timeout=10).read()
        check(img.startswith(b"DARECHO1"), "corpus image")
    finally:
        proc.send_signal(signal.SIGTERM)
        try:
            code = proc.wait(timeout=20)
        except subprocess.TimeoutExpired:
            proc.kill()
            check(False, "serve did not stop on SIGTERM")
    check(code == 0, "serve exit code %d" % code)


def main():
    dar, data, which = sys.argv[1:4]
    work = tempfile.mkdtemp(prefix="dar-cli-")
    try:
        {"usage": test_usage, "eval": test_eval, "serve": test_serve}[which](dar, data, work)
    finally:
        shutil.rmtree(work, ignore_errors=True)
    print("ok", which)


if __name__ == "__main__":
    main()
