# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernels (see ``_kernels_py`` for the reference version).

The transforms are a radix-2 FFT when ``2M`` is a power of two and a
table-driven direct DFT otherwise.  They work on split real/imaginary arrays
so no C complex multiplication (and its inf/nan special-casing) is involved.
Coefficients are made exactly Hermitian after every forward transform.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()

ctypedef double complex cplx


cdef class _Workspace:
    cdef int n, M, pow2
    cdef double[::1] re, im, tre, tim
    cdef double[::1] tw_re, tw_im
    cdef double[:, ::1] tab_re, tab_im
    cdef Py_ssize_t[::1] rev
    cdef const double[::1] sign
    cdef const double[::1] poly
    cdef int npoly

    def __init__(self, int n, poly):
        cdef int i, j, b, bits
        self.n = n
        self.M = n // 2
        self.re = np.zeros(n)
        self.im = np.zeros(n)
        self.tre = np.zeros(n)
        self.tim = np.zeros(n)
        self.sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        self.poly = np.ascontiguousarray(poly, dtype=np.float64)
        self.npoly = self.poly.shape[0]
        self.pow2 = (n & (n - 1)) == 0
        if self.pow2:
            bits = 0
            while (1 << bits) < n:
                bits += 1
            rev = np.zeros(n, dtype=np.intp)
            for i in range(n):
                j = 0
                for b in range(bits):
                    if i & (1 << b):
                        j |= 1 << (bits - 1 - b)
                rev[i] = j
            self.rev = rev
            # exp(-2 pi i k / n), k < n/2
            ang = -2.0 * np.pi * np.arange(max(n // 2, 1)) / n
            self.tw_re = np.cos(ang)
            self.tw_im = np.sin(ang)
            self.tab_re = np.zeros((1, 1))
            self.tab_im = np.zeros((1, 1))
        else:
            k = np.arange(n)
            ang = -2.0 * np.pi * (np.outer(k, k) % n) / n
            self.tab_re = np.cos(ang)
            self.tab_im = np.sin(ang)
            self.tw_re = np.zeros(1)
            self.tw_im = np.zeros(1)
            self.rev = np.zeros(1, dtype=np.intp)

    cdef void fft(self, bint inverse) noexcept nogil:
        """Unnormalised in-place transform of (re, im), sign -1 (forward) or +1 (inverse)."""
        cdef int n = self.n
        cdef int i, j, size, half, step, k, a, b
        cdef double s = 1.0 if inverse else -1.0
        cdef double wr, wi, xr, xi, tr, ti
        cdef double[::1] re = self.re, im = self.im
        if not self.pow2:
            for i in range(n):
                tr = 0.0
                ti = 0.0
                for j in range(n):
                    wr = self.tab_re[i, j]
                    wi = -s * self.tab_im[i, j]
                    tr = tr + wr * re[j] + wi * im[j]
                    ti = ti + wr * im[j] - wi * re[j]
                self.tre[i] = tr
                self.tim[i] = ti
            for i in range(n):
                re[i] = self.tre[i]
                im[i] = self.tim[i]
            return
        for i in range(n):
            j = self.rev[i]
            if j > i:
                tr = re[i]
                re[i] = re[j]
                re[j] = tr
                ti = im[i]
                im[i] = im[j]
                im[j] = ti
        size = 2
        while size <= n:
            half = size // 2
            step = n // size
            i = 0
            while i < n:
                for k in range(half):
                    wr = self.tw_re[k * step]
                    wi = -s * self.tw_im[k * step]
                    a = i + k
                    b = a + half
                    xr = re[b]
                    xi = im[b]
                    tr = wr * xr + wi * xi
                    ti = wr * xi - wi * xr
                    re[b] = re[a] - tr
                    im[b] = im[a] - ti
                    re[a] = re[a] + tr
                    im[a] = im[a] + ti
                i += size
            size *= 2

    cdef bint nonlinearity(self, cplx[::1] Q, cplx[::1] out) noexcept nogil:
        """out = -F g(F^-1 Q); returns False if the grid values are not finite."""
        cdef int n = self.n, M = self.M
        cdef int m, k
        cdef double u, gu, sg
        cdef double inv_n = 1.0 / n
        cdef double[::1] re = self.re, im = self.im
        for m in range(n):
            re[m] = Q[m].real * self.sign[m]
            im[m] = Q[m].imag * self.sign[m]
        self.fft(True)
        for m in range(n):
            u = re[m]
            if not isfinite(u):
                return False
            gu = 0.0
            for k in range(self.npoly - 1, -1, -1):
                gu = gu * u + self.poly[k]
            re[m] = gu
            im[m] = 0.0
        self.fft(False)
        out[0] = -re[0] * inv_n
        out[M] = -re[M] * inv_n * self.sign[M]
        for m in range(1, M):
            sg = -inv_n * self.sign[m]
            out[m].real = re[m] * sg
            out[m].imag = im[m] * sg
            out[n - m].real = re[m] * sg
            out[n - m].imag = -im[m] * sg
        return True


def erkn_advance(cplx[::1] q, cplx[::1] p, long n_steps,
                 const double[::1] cos_c, const double[::1] hcsinc_c,
                 const double[::1] cos_h, const double[::1] hsinc_h, const double[::1] wsin,
                 const double[::1] h2bb, const double[::1] hb, poly):
    cdef int n = q.shape[0]
    cdef _Workspace ws = _Workspace(n, poly)
    cdef cplx[::1] Q = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] G = np.empty(n, dtype=np.complex128)
    cdef long step
    cdef int m
    cdef double qr, qi, pr, pi_, acc
    cdef long done = n_steps
    with nogil:
        for step in range(n_steps):
            for m in range(n):
                Q[m].real = cos_c[m] * q[m].real + hcsinc_c[m] * p[m].real
                Q[m].imag = cos_c[m] * q[m].imag + hcsinc_c[m] * p[m].imag
            if not ws.nonlinearity(Q, G):
                done = step
                break
            acc = 0.0
            for m in range(n):
                qr = q[m].real
                qi = q[m].imag
                pr = p[m].real
                pi_ = p[m].imag
                q[m].real = cos_h[m] * qr + hsinc_h[m] * pr + h2bb[m] * G[m].real
                q[m].imag = cos_h[m] * qi + hsinc_h[m] * pi_ + h2bb[m] * G[m].imag
                p[m].real = cos_h[m] * pr - wsin[m] * qr + hb[m] * G[m].real
                p[m].imag = cos_h[m] * pi_ - wsin[m] * qi + hb[m] * G[m].imag
                acc += q[m].real + q[m].imag + p[m].real + p[m].imag
            if not isfinite(acc):
                done = step
                break
    return done


def trig_advance(cplx[::1] q, cplx[::1] p, long n_steps,
                 const double[::1] cos_h, const double[::1] hsinc_h, const double[::1] wsin,
                 const double[::1] kick_q, const double[::1] kick_p0, const double[::1] kick_p1,
                 cplx[::1] gq, poly):
    cdef int n = q.shape[0]
    cdef _Workspace ws = _Workspace(n, poly)
    cdef cplx[::1] qn = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] Gn = np.empty(n, dtype=np.complex128)
    cdef long step
    cdef int m
    cdef double qr, qi, acc
    cdef long done = n_steps
    with nogil:
        for step in range(n_steps):
            for m in range(n):
                qn[m].real = cos_h[m] * q[m].real + hsinc_h[m] * p[m].real + kick_q[m] * gq[m].real
                qn[m].imag = cos_h[m] * q[m].imag + hsinc_h[m] * p[m].imag + kick_q[m] * gq[m].imag
            if not ws.nonlinearity(qn, Gn):
                done = step
                break
            acc = 0.0
            for m in range(n):
                qr = q[m].real
                qi = q[m].imag
                p[m].real = cos_h[m] * p[m].real - wsin[m] * qr + kick_p0[m] * gq[m].real + kick_p1[m] * Gn[m].real
                p[m].imag = cos_h[m] * p[m].imag - wsin[m] * qi + kick_p0[m] * gq[m].imag + kick_p1[m] * Gn[m].imag
                q[m] = qn[m]
                gq[m] = Gn[m]
                acc += q[m].real + q[m].imag + p[m].real + p[m].imag
            if not isfinite(acc):
                done = step
                break
    return done
