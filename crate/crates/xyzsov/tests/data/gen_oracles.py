"""Regenerates oracles.json with mpmath at 40 digits. Run: python3 gen_oracles.py"""
import json
import mpmath as mp

mp.mp.dps = 40


def th(j, z, tau, d=0):
    return mp.jtheta(j, z, mp.exp(1j * mp.pi * tau), d)


def cpl(z):
    z = mp.mpc(z)
    return [float(z.real), float(z.imag)]


omegas = [0.8j, 0.35 + 1.1j, 2.0j, 5.0j]
points = [0.3 + 0.1j, -0.7 + 0.45j, 1.9 - 0.2j, 0.2 + 1.6j, -2.4 - 2.1j]

theta = []
for w in omegas:
    for k in (1, 2):
        for z in points:
            for j in (1, 2, 3, 4):
                theta.append({
                    "omega": cpl(w), "k": k, "j": j, "z": cpl(z),
                    "value": cpl(th(j, z, k * w)), "deriv": cpl(th(j, z, k * w, 1)),
                })

weights = []
for w in (0.8j, 0.35 + 1.1j):
    for l, eta in ((0.27 - 0.11j, 0.35 + 0.12j), (-0.6 + 0.3j, 0.21 - 0.05j)):
        t = lambda j, z: th(j, z, 2 * w)
        den = th(2, 0, w) * t(4, 0)
        abcd = [
            2 * t(4, eta) * t(1, l + eta) * t(4, l) / den,
            2 * t(4, eta) * t(1, l) * t(4, l + eta) / den,
            2 * t(1, eta) * t(4, l) * t(4, l + eta) / den,
            2 * t(1, eta) * t(1, l + eta) * t(1, l) / den,
        ]
        weights.append({"omega": cpl(w), "lambda": cpl(l), "eta": cpl(eta), "abcd": [cpl(x) for x in abcd]})

kcoef = []
for w in (0.8j, 0.35 + 1.1j):
    for al in ((0.52 + 0.14j, -0.41 + 0.2j, 0.17 + 0.6j), (0.3 - 0.22j, -0.12 + 0.33j, 0.05 + 0.81j)):
        cx, cy, cz = mp.mpc(1), mp.mpc(-1), mp.mpc(1)
        for a in al:
            t1 = th(1, a, w)
            cx *= th(4, a, w) / t1
            cy *= th(3, a, w) / t1
            cz *= th(2, a, w) / t1
        kcoef.append({"omega": cpl(w), "alpha": [cpl(a) for a in al], "c": [cpl(cx), cpl(cy), cpl(cz)]})

with open("oracles.json", "w") as f:
    json.dump({"theta": theta, "r_weights": weights, "k_coeffs": kcoef}, f, indent=1)
