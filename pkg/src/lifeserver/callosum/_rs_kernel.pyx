# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Reed-Solomon kernel for GF(256), primitive polynomial 0x11D.

Same algorithm and outputs as rs_python.ReedSolomon with c_exp=8; only the
hot byte loops are lowered to C.  Selected automatically at import by
rs_backend when the extension built.
"""

from libc.string cimport memset

from lifeserver.callosum.rs_python import RSDecodeFailure

cdef int GF_EXP[512]
cdef int GF_LOG[256]

cdef void _init_tables():
    cdef int i, x = 1
    for i in range(255):
        GF_EXP[i] = x
        GF_LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= 0x11D
    for i in range(255, 512):
        GF_EXP[i] = GF_EXP[i - 255]

_init_tables()

cdef inline int gf_mul(int a, int b):
    if a == 0 or b == 0:
        return 0
    return GF_EXP[GF_LOG[a] + GF_LOG[b]]

cdef inline int gf_div(int a, int b):
    if a == 0:
        return 0
    # cdivision: keep the operand non-negative before the modulo
    return GF_EXP[(GF_LOG[a] + 255 - GF_LOG[b]) % 255]

cdef inline int gf_inv(int a):
    return GF_EXP[255 - GF_LOG[a]]

# generator polynomials cached per nsym (highest degree first, leading 1)
_GEN_CACHE = {}


def _gen_poly(int nsym):
    poly = _GEN_CACHE.get(nsym)
    if poly is not None:
        return poly
    cdef list g = [1]
    cdef list term
    cdef int i
    for i in range(nsym):
        term = [1, GF_EXP[i]]
        g = _poly_mul(g, term)
    poly = bytes(g)
    _GEN_CACHE[nsym] = poly
    return poly


def _poly_mul(p, q):
    r = [0] * (len(p) + len(q) - 1)
    cdef int i, j
    for j in range(len(q)):
        if q[j]:
            for i in range(len(p)):
                if p[i]:
                    r[i + j] ^= gf_mul(p[i], q[j])
    return r


def rs_encode(data, int nsym):
    """Systematic encode: returns data + nsym parity bytes."""
    cdef bytes d = bytes(data)
    cdef int dlen = len(d)
    if dlen + nsym > 255:
        raise ValueError("message too long for GF(256)")
    cdef bytes gen = _gen_poly(nsym)
    cdef const unsigned char[:] dv = d
    cdef const unsigned char[:] gv = gen
    cdef unsigned char parity[256]
    memset(parity, 0, 256)
    cdef int i, j, coef
    for i in range(dlen):
        coef = dv[i] ^ parity[0]
        for j in range(nsym - 1):
            parity[j] = parity[j + 1]
        parity[nsym - 1] = 0
        if coef:
            for j in range(nsym):
                parity[j] ^= gf_mul(gv[j + 1], coef)
    return d + bytes(parity[:nsym])


def rs_decode(codeword, int nsym):
    """Correct up to nsym//2 byte errors; returns the data portion."""
    cdef bytes cw = bytes(codeword)
    cdef int n = len(cw)
    if n > 255 or n <= nsym:
        raise ValueError("bad codeword length")
    cdef unsigned char msg[256]
    cdef int i, j
    for i in range(n):
        msg[i] = cw[i]

    # syndromes
    cdef int synd[256]
    cdef int all_zero = 1
    cdef int s, x
    for i in range(nsym):
        s = 0
        x = GF_EXP[i]
        for j in range(n):
            s = gf_mul(s, x) ^ msg[j]
        synd[i] = s
        if s:
            all_zero = 0
    if all_zero:
        return cw[:n - nsym]

    # Berlekamp-Massey
    cdef int err_loc[257]
    cdef int old_loc[257]
    cdef int tmp[257]
    cdef int loc_len = 1, old_len = 1, new_len
    err_loc[0] = 1
    old_loc[0] = 1
    cdef int delta, inv_delta, k, si
    for i in range(nsym):
        delta = synd[i]
        for j in range(1, loc_len):
            si = i - j
            if si < 0:
                si += nsym
            delta ^= gf_mul(err_loc[loc_len - 1 - j], synd[si])
        old_loc[old_len] = 0
        old_len += 1
        if delta != 0:
            if old_len > loc_len:
                # swap roles: err_loc <- old_loc*delta, old_loc <- err_loc/delta
                inv_delta = gf_inv(delta)
                for k in range(old_len):
                    tmp[k] = gf_mul(old_loc[k], delta)
                for k in range(loc_len):
                    old_loc[k] = gf_mul(err_loc[k], inv_delta)
                new_len = old_len
                old_len = loc_len
                loc_len = new_len
                for k in range(loc_len):
                    err_loc[k] = tmp[k]
            # err_loc += old_loc * delta, right-aligned
            new_len = loc_len if loc_len > old_len else old_len
            for k in range(new_len):
                tmp[k] = 0
            for k in range(loc_len):
                tmp[new_len - loc_len + k] = err_loc[k]
            for k in range(old_len):
                tmp[new_len - old_len + k] ^= gf_mul(old_loc[k], delta)
            for k in range(new_len):
                err_loc[k] = tmp[k]
            loc_len = new_len
    # strip leading zeros
    cdef int lead = 0
    while lead < loc_len - 1 and err_loc[lead] == 0:
        lead += 1
    loc_len = loc_len - lead
    for k in range(loc_len):
        err_loc[k] = err_loc[k + lead]

    cdef int errs = loc_len - 1
    if errs * 2 > nsym:
        raise RSDecodeFailure("too many errors (locator degree %d)" % errs)

    # Chien search on the reversed locator
    cdef int err_pos[128]
    cdef int n_found = 0
    cdef int xi, acc
    for i in range(n):
        xi = GF_EXP[i % 255]
        # evaluate sum_m err_loc[m] * xi^m (err_loc stored highest-first)
        acc = 0
        x = 1
        for j in range(loc_len):
            acc ^= gf_mul(err_loc[j], x)
            x = gf_mul(x, xi)
        if acc == 0:
            if n_found >= 128:
                raise RSDecodeFailure("error locator roots do not match degree")
            err_pos[n_found] = n - 1 - i
            n_found += 1
    if n_found != errs:
        raise RSDecodeFailure("error locator roots do not match degree")

    # errata locator from positions and error evaluator
    cdef int loc2[130]
    cdef int loc2_len = 1
    loc2[0] = 1
    cdef int p, a
    for i in range(n_found):
        p = n - 1 - err_pos[i]  # coefficient degree
        a = GF_EXP[p % 255]
        # loc2 *= (a*x + 1), highest degree first
        for k in range(loc2_len, 0, -1):
            loc2[k] = loc2[k - 1]
        loc2[0] = 0
        loc2_len += 1
        for k in range(loc2_len - 1):
            loc2[k] ^= gf_mul(loc2[k + 1], a)

    # eval_poly = (reversed syndromes * loc2) mod x^loc2_len (low part),
    # stored highest-first; coefficient of x^t gathers synd[u]*loc2[loc2_len-1-t+u]
    cdef int eval_poly[130]
    cdef int t, li
    for t in range(loc2_len):
        s = 0
        for j in range(nsym):
            li = loc2_len - 1 - t + j
            if 0 <= li < loc2_len:
                s ^= gf_mul(synd[j], loc2[li])
        eval_poly[loc2_len - 1 - t] = s

    # Forney
    cdef int Xi, Xi_inv, loc_prime, y, mag, xj
    for i in range(n_found):
        p = n - 1 - err_pos[i]
        Xi = GF_EXP[p % 255]
        Xi_inv = gf_inv(Xi)
        loc_prime = 1
        for j in range(n_found):
            if j != i:
                xj = GF_EXP[(n - 1 - err_pos[j]) % 255]
                loc_prime = gf_mul(loc_prime, 1 ^ gf_mul(Xi_inv, xj))
        if loc_prime == 0:
            raise RSDecodeFailure("degenerate error locator derivative")
        y = eval_poly[0]
        for k in range(1, loc2_len):
            y = gf_mul(y, Xi_inv) ^ eval_poly[k]
        msg[err_pos[i]] ^= gf_div(y, loc_prime)

    # re-check all syndromes cancel
    for i in range(nsym):
        s = 0
        x = GF_EXP[i]
        for j in range(n):
            s = gf_mul(s, x) ^ msg[j]
        if s:
            raise RSDecodeFailure("correction failed to cancel syndromes")
    return bytes(msg[:n - nsym])
