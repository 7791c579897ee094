"""Heuristic worker used by the integration tests.

Reads one JSON request per line on stdin and writes one JSON response per
line on stdout.
"""

import builtins
import json
import math
import signal
import sys
import time
import traceback

import numpy as np


class Deadline(Exception):
    pass


def _alarm(signum, frame):
    raise Deadline()


SHARED = (np, math, builtins)
_pristine = {}


def snapshot():
    for m in SHARED:
        _pristine[m.__name__] = dict(m.__dict__)


def restore():
    for m in SHARED:
        saved = _pristine[m.__name__]
        current = m.__dict__
        for k in [k for k in current if k not in saved]:
            del current[k]
        for k, v in saved.items():
            if current.get(k, _pristine) is not v:
                setattr(m, k, v)


def decode(arg):
    kind, data = arg["kind"], arg["data"]
    if kind == "matrix":
        return np.array(data, dtype=float).reshape(len(data), -1 if data else 0)
    if kind == "vector":
        return np.array(data, dtype=float)
    if kind == "scalar":
        return float(data)
    raise ValueError("unknown kind " + str(kind))


def encode(value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        return None, "non-finite"
    if arr.ndim == 2:
        return {"kind": "matrix", "data": arr.tolist()}, None
    if arr.ndim == 1:
        return {"kind": "vector", "data": arr.tolist()}, None
    if arr.ndim == 0:
        return {"kind": "scalar", "data": float(arr)}, None
    return None, "unsupported output rank {}".format(arr.ndim)


def failure(rid, kind, message):
    return {"id": rid, "ok": False, "error": {"type": kind, "message": message}}


def handle(req):
    rid = req.get("id")
    namespace = {"np": np, "numpy": np, "math": math, "__name__": "candidate"}
    start = time.perf_counter()
    signal.setitimer(signal.ITIMER_REAL, max(float(req.get("timeout_s", 60.0)), 0.001))
    try:
        exec(compile(req["source"], "<candidate>", "exec"), namespace)
        fn = namespace.get(req["entry"])
        if not callable(fn):
            return failure(rid, "exception", "no function named " + req["entry"])
        args = [decode(a) for a in req["args"]]
        out = fn(*args)
        signal.setitimer(signal.ITIMER_REAL, 0)
    except Deadline:
        return failure(rid, "timeout", "deadline exceeded")
    except Exception as e:
        signal.setitimer(signal.ITIMER_REAL, 0)
        tb = traceback.format_exception_only(type(e), e)
        return failure(rid, "exception", "".join(tb).strip())
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
    elapsed = time.perf_counter() - start
    try:
        result, problem = encode(out)
    except Exception as e:
        return failure(rid, "shape", "output not numeric: " + str(e))
    if problem is not None:
        return failure(rid, "shape", problem)
    return {"id": rid, "ok": True, "result": result, "elapsed_s": elapsed}


def main():
    signal.signal(signal.SIGALRM, _alarm)
    snapshot()
    out = sys.stdout
    sys.stdout = sys.stderr
    out.write(json.dumps({"ready": True, "proto": 1}) + "\n")
    out.flush()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            resp = handle(req)
        except Deadline:
            resp = failure(None, "timeout", "deadline exceeded")
        except Exception as e:
            resp = failure(None, "exception", "bad request: " + str(e))
        restore()
        out.write(json.dumps(resp, allow_nan=False) + "\n")
        out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
