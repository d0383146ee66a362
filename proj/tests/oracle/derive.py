"""Independent reference values for the unit tests (numpy/scipy only).

Run: python3 tests/oracle/derive.py
"""
import numpy as np
from scipy.optimize import minimize


def buyer(a, mu, p, starts=64, seed=0):
    """argmax over {x'x <= 1} ∩ [0,1]^n of a'x + (4/mu) sum sqrt(x) - p'x."""
    a, p = np.asarray(a, float), np.asarray(p, float)
    n = a.size
    f = lambda x: -(a @ x + 4 / mu * np.sqrt(np.maximum(x, 0)).sum() - p @ x)
    cons = [{"type": "ineq", "fun": lambda x: 1 - x @ x}]
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(starts):
        x0 = rng.uniform(0, 1, n)
        x0 /= max(1, np.linalg.norm(x0))
        r = minimize(f, x0, method="SLSQP", bounds=[(0, 1)] * n, constraints=cons,
                     options={"ftol": 1e-15, "maxiter": 1000})
        if best is None or r.fun < best.fun:
            best = r
    return best.x, -best.fun


def cut(A, c, u, b):
    A, c, u = np.asarray(A, float), np.asarray(c, float), np.asarray(u, float)
    n = c.size
    s = np.sqrt(u @ A @ u)
    alpha = (u @ c - b) / s
    bv = A @ u / s
    A2 = n * n / (n * n - 1) * (1 - alpha ** 2) * (A - 2 * (1 + n * alpha) / ((n + 1) * (1 + alpha)) * np.outer(bv, bv))
    c2 = c - (1 + n * alpha) / (n + 1) * bv
    return A2, c2, alpha


np.set_printoptions(precision=17)
x, v = buyer([2, 0.5], 1e6, [0.1, 0.1])
print("buyer a=(2,.5) mu=1e6 p=(.1,.1):", repr(x), "direction a-p:", repr(np.array([1.9, 0.4]) / np.hypot(1.9, 0.4)))
x, v = buyer([1, 1], 1e6, [0, 0])
print("g(0) a=(1,1) mu=1e6:", repr(v), "bundle", repr(x))
x, v = buyer([1, 1], 1e6, [1, 1])
print("a=p=(1,1) mu=1e6:", repr(x))
x, v = buyer([0.3, 0.2], 4.0, [0.5, 0.1])
print("a=(.3,.2) mu=4 p=(.5,.1):", repr(x), repr(v))
A2, c2, al = cut(np.diag([4.0, 1.0]), [1, 1], [1, 1], 1.0)
print("cut diag(4,1) c=(1,1) u=(1,1) b=1:", repr(A2), repr(c2), al)
A2, c2, al = cut(np.eye(3), [0, 0, 0], [-1, 0, 0], 0.2)
print("cut I3 H={-a1<=0.2}:", repr(A2), repr(c2), al)
w = np.linalg.eigvalsh(np.array([[3.0, 1.0], [1.0, 2.0]]))
print("select A=[[3,1],[1,2]] ball: top eig", repr(w[-1]), "objective", repr(np.sqrt(w[-1])),
      "vector", repr(np.linalg.eigh(np.array([[3.0, 1.0], [1.0, 2.0]]))[1][:, -1]))
