#!/usr/bin/env python3
"""Solve an exported .dat-s feasibility problem with SDPA (sdpa-python) and
print the verdict as JSON: {"verdict": "feasible" | "infeasible" | "unknown", ...}.

Exit codes: 0 verdict printed, 4 sdpap not importable.
"""
import json
import sys
import warnings

try:
    import numpy as np
    import sdpap
except ImportError as e:  # pragma: no cover
    print(json.dumps({"verdict": "unavailable", "reason": str(e)}))
    sys.exit(4)


def main(path):
    warnings.filterwarnings("ignore")
    A, b, c, K, J = sdpap.importsdpa(path)
    x, y, info, _, _ = sdpap.solve(A, b, c, K, J, {"print": "no"})
    phase = info["phasevalue"]
    # the file's x-variables are the dual y here; dual unboundedness means
    # the primal cone problem has a certificate of infeasibility
    verdict = {"pdOPT": "feasible", "pFEAS": "feasible", "pdFEAS": "feasible", "dUNBD": "infeasible", "pINF_dFEAS": "infeasible"}.get(phase, "unknown")
    out = {"verdict": verdict, "phase": phase, "m": int(A.shape[0])}
    if verdict == "feasible":
        # rebuild F(y) = sum y_i F_i - F_0 from the file and measure it
        n = int(round(np.sqrt(A.shape[1])))
        yv = np.asarray(y.todense() if hasattr(y, "todense") else y).ravel()
        F = np.zeros((n, n))
        with open(path) as fh:
            lines = [l for l in fh if l.strip() and l[0] not in "\"*"]
        for line in lines[4:]:
            mat, _, i, j, v = line.split()
            mat, i, j, v = int(mat), int(i) - 1, int(j) - 1, float(v)
            w = -v if mat == 0 else v * yv[mat - 1]
            F[i, j] += w
            if i != j:
                F[j, i] += w
        out["min_eigenvalue"] = float(np.linalg.eigvalsh(F).min())
    print(json.dumps(out))


if __name__ == "__main__":
    main(sys.argv[1])
