"""Reference numpy implementation of the multi-step stepping kernels.

Same call signatures as the compiled ``_kernels`` module.  ``q``, ``p`` and
``gq`` are complex128 arrays advanced in place; each function returns the
number of steps completed with a finite state (``< n_steps`` on blow-up).
"""
import numpy as np


def _alternating(n):
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


class _Transform:
    __slots__ = ("n", "M", "sign", "poly")

    def __init__(self, n, poly):
        self.n = n
        self.M = n // 2
        self.sign = _alternating(n)
        self.poly = np.asarray(poly, dtype=float)

    def nonlinearity(self, q):
        n, M = self.n, self.M
        u = np.fft.irfft((q * self.sign)[: M + 1], n=n) * n
        if not np.all(np.isfinite(u)):
            return None
        gu = np.zeros_like(u)
        for c in self.poly[::-1]:
            gu = gu * u + c
        half = np.fft.rfft(gu) / n
        out = np.empty(n, complex)
        out[: M + 1] = half
        out[M + 1:] = np.conj(half[1:M][::-1])
        out[0] = out[0].real
        out[M] = out[M].real
        out *= -self.sign
        return out


@np.errstate(over="ignore", invalid="ignore")
def erkn_advance(q, p, n_steps, cos_c, hcsinc_c, cos_h, hsinc_h, wsin, h2bb, hb, poly):
    tr = _Transform(q.size, poly)
    for step in range(n_steps):
        G = tr.nonlinearity(cos_c * q + hcsinc_c * p)
        if G is None:
            return step
        qn = cos_h * q + hsinc_h * p + h2bb * G
        pn = cos_h * p - wsin * q + hb * G
        q[:] = qn
        p[:] = pn
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            return step
    return n_steps


@np.errstate(over="ignore", invalid="ignore")
def trig_advance(q, p, n_steps, cos_h, hsinc_h, wsin, kick_q, kick_p0, kick_p1, gq, poly):
    """Trigonometric integrator reusing ``g~(q^{n+1})`` as the next step's ``g~(q^n)``.

    ``gq`` must hold ``g~(q)`` on entry and holds ``g~`` of the final ``q`` on exit.
    """
    tr = _Transform(q.size, poly)
    for step in range(n_steps):
        qn = cos_h * q + hsinc_h * p + kick_q * gq
        Gn = tr.nonlinearity(qn)
        if Gn is None:
            return step
        pn = cos_h * p - wsin * q + kick_p0 * gq + kick_p1 * Gn
        q[:] = qn
        p[:] = pn
        gq[:] = Gn
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            return step
    return n_steps
