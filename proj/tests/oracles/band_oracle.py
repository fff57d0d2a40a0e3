"""Independent numpy reference for the frozen band and thermodynamic values.

Projections come from numpy eigenvectors and their k-derivatives from central
differences, so nothing here shares code with the C++ library.
"""
import numpy as np

STEP = 1e-5


def bloch(p, q, k):
    B0 = 2 * np.pi * p / q
    H = np.zeros((q, q), complex)
    for m in range(q):
        H[m, m] = 2 * np.cos(k[1] + m * B0)
    if q == 1:
        H[0, 0] += 2 * np.cos(k[0])
        return H
    for m in range(q):
        H[(m + 1) % q, m] += np.exp(1j * k[0])
        H[m, (m + 1) % q] += np.exp(-1j * k[0])
    return H


def proj(p, q, j, k):
    w, v = np.linalg.eigh(bloch(p, q, k))
    u = v[:, j]
    return w[j], np.outer(u, u.conj())


def derivs(p, q, j, k):
    d = []
    for a in range(2):
        dk = np.zeros(2)
        dk[a] = STEP
        d.append((proj(p, q, j, k + dk)[1] - proj(p, q, j, k - dk)[1]) / (2 * STEP))
    return d


def geometry(p, q, j, k):
    k = np.asarray(k, float)
    e, P = proj(p, q, j, k)
    d1, d2 = derivs(p, q, j, k)
    om = (-1j * np.trace(P @ (d1 @ d2 - d2 @ d1))).real
    M = np.trace(P @ d1 @ (bloch(p, q, k) - e * np.eye(q)) @ d2).imag
    return e, om, M


def fukui(p, q, j, N):
    h = 2 * np.pi / q / N
    vec = np.empty((N + 1, N + 1, q), complex)
    for a in range(N + 1):
        for c in range(N + 1):
            vec[a, c] = np.linalg.eigh(bloch(p, q, (a * h, c * h)))[1][:, j]
    total = 0.0
    for a in range(N):
        for c in range(N):
            u = [vec[a, c], vec[a + 1, c], vec[a + 1, c + 1], vec[a, c + 1]]
            prod = 1.0
            for s in range(4):
                prod *= np.vdot(u[s], u[(s + 1) % 4])
            total += np.angle(prod)
    return q * total / (2 * np.pi)


def pressure(p, q, beta, mu, s, N):
    h = 2 * np.pi / q / N
    acc = 0.0
    for a in range(N):
        for c in range(N):
            for j in range(q):
                e, om, M = geometry(p, q, j, (a * h, c * h))
                x = beta * (e + s * M - mu)
                acc += (1 + s * om) * np.logaddexp(0.0, -x) / beta
    return acc / (q * N * N)


if __name__ == "__main__":
    np.set_printoptions(precision=17)
    for j in range(3):
        print("geometry 1/3 band", j, "k=(0.3,0.7)", ["%.15g" % x for x in geometry(1, 3, j, (0.3, 0.7))])
        print("geometry 1/3 band", j, "k=(0,0)", ["%.15g" % x for x in geometry(1, 3, j, (0.0, 0.0))])
    for j in range(3):
        print("chern 1/3 band", j, "%.12f" % fukui(1, 3, j, 60))
    for j in range(5):
        print("chern 2/5 band", j, "%.12f" % fukui(2, 5, j, 40))
    N = 32
    print("pressure 1/3 beta=5 mu=0 N=32: %.15g" % pressure(1, 3, 5.0, 0.0, 0.0, N))
    ds = 1e-4
    m = (pressure(1, 3, 5.0, 0.0, ds, N) - pressure(1, 3, 5.0, 0.0, -ds, N)) / (2 * ds)
    print("magnetization (fd in eps b) N=32: %.12g" % m)
