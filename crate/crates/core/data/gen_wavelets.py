"""Regenerate wavelets_v1.json from PyWavelets.

The dmey taps shipped by PyWavelets are an FIR truncation and are only
orthonormal to ~2e-3; they are projected onto the exact double-shift
orthonormality constraints with a minimum-change Gauss-Newton step so the
periodized transform is exactly energy preserving.
"""
import json

import numpy as np
import pywt


def orthonormalize(h, iters=50):
    h = np.array(h, dtype=float)
    n = len(h)
    for _ in range(iters):
        cons, jac = [], []
        for m in range(n // 2):
            cons.append(np.dot(h[: n - 2 * m], h[2 * m:]) - (1.0 if m == 0 else 0.0))
            g = np.zeros(n)
            g[: n - 2 * m] += h[2 * m:]
            g[2 * m:] += h[: n - 2 * m]
            jac.append(g)
        cons.append(h.sum() - np.sqrt(2.0))
        jac.append(np.ones(n))
        c, j = np.array(cons), np.array(jac)
        if np.abs(c).max() < 1e-15:
            break
        h = h - np.linalg.lstsq(j, c, rcond=None)[0]
    return h


def qmf(lo):
    lo = np.asarray(lo)
    n = len(lo)
    return np.array([(-1) ** k * lo[n - 1 - k] for k in range(n)])


FAMILY = [("rbio", "reverse-biorthogonal"), ("bior", "biorthogonal"), ("coif", "coiflets"),
          ("sym", "symlets"), ("db", "daubechies"), ("dmey", "discrete-meyer")]

names = [f"db{i}" for i in range(1, 11)] + [f"sym{i}" for i in range(2, 11)] + [f"coif{i}" for i in range(1, 6)]
for p in ["1.1", "1.3", "2.2", "3.3", "4.4", "6.8"]:
    names += [f"bior{p}", f"rbio{p}"]
names.append("dmey")

out = {"version": 1, "source": f"PyWavelets {pywt.__version__}", "wavelets": []}
for name in names:
    w = pywt.Wavelet(name)
    family = next(f for prefix, f in FAMILY if name.startswith(prefix))
    dec_lo, dec_hi, rec_lo, rec_hi = map(list, (w.dec_lo, w.dec_hi, w.rec_lo, w.rec_hi))
    if name == "dmey":
        lo = orthonormalize(dec_lo[::-1])
        rec_lo = list(lo)
        rec_hi = list(qmf(lo))
        dec_lo = rec_lo[::-1]
        dec_hi = rec_hi[::-1]
    out["wavelets"].append({
        "name": name, "family": family, "orthogonal": bool(w.orthogonal),
        "dec_lo": dec_lo, "dec_hi": dec_hi, "rec_lo": rec_lo, "rec_hi": rec_hi,
    })

with open("wavelets_v1.json", "w") as fh:
    json.dump(out, fh, indent=1)
