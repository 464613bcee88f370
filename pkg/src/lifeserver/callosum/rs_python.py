"""Reed-Solomon codec over GF(2^c), pure Python.

Systematic encoding: the data bytes are transmitted unchanged and nsym
parity symbols are appended; decoding corrects up to nsym//2 symbol errors
at unknown positions.  Parameterized over the field so the scaled-down
RS(15,11)/GF(16) variant used by the miscorrection trials shares the same
code path as the production RS(255,223)/GF(256) configuration.

This is the fallback backend; the compiled kernel in _rs_kernel covers the
GF(256) hot path with identical outputs.
"""

from __future__ import annotations


class RSDecodeFailure(Exception):
    """Syndrome equations unsolvable: more errors than the code corrects."""


class GF:
    """Lookup-table arithmetic for GF(2^c_exp) with the given primitive
    polynomial and generator element."""

    def __init__(self, c_exp=8, prim=0x11D, generator=2):
        self.c_exp = c_exp
        self.field_charac = (1 << c_exp) - 1
        self.prim = prim
        self.generator = generator
        size = self.field_charac
        self.exp = [0] * (2 * size)
        self.log = [0] * (size + 1)
        x = 1
        for i in range(size):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x & (1 << c_exp):
                x ^= prim
        for i in range(size, 2 * size):
            self.exp[i] = self.exp[i - size]

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in GF")
        if a == 0:
            return 0
        return self.exp[(self.log[a] - self.log[b]) % self.field_charac]

    def pow(self, a, n):
        return self.exp[(self.log[a] * n) % self.field_charac]

    def inverse(self, a):
        return self.exp[self.field_charac - self.log[a]]

    # polynomials: coefficient lists, highest degree first
    def poly_scale(self, p, x):
        return [self.mul(c, x) for c in p]

    def poly_add(self, p, q):
        r = [0] * max(len(p), len(q))
        r[len(r) - len(p):] = p
        for i, c in enumerate(q):
            r[i + len(r) - len(q)] ^= c
        return r

    def poly_mul(self, p, q):
        r = [0] * (len(p) + len(q) - 1)
        for j, qj in enumerate(q):
            if qj:
                for i, pi in enumerate(p):
                    if pi:
                        r[i + j] ^= self.mul(pi, qj)
        return r

    def poly_eval(self, p, x):
        y = p[0]
        for c in p[1:]:
            y = self.mul(y, x) ^ c
        return y


class ReedSolomon:
    """RS codec with nsym parity symbols over the given field."""

    def __init__(self, nsym, c_exp=8, prim=0x11D, generator=2):
        if nsym < 2:
            raise ValueError("nsym must be >= 2")
        self.nsym = nsym
        self.gf = GF(c_exp=c_exp, prim=prim, generator=generator)
        if nsym >= self.gf.field_charac:
            raise ValueError("nsym too large for the field")
        g = [1]
        for i in range(nsym):
            g = self.gf.poly_mul(g, [1, self.gf.pow(self.gf.generator, i)])
        self.gen_poly = g

    @property
    def max_data_len(self):
        return self.gf.field_charac - self.nsym

    def encode(self, data):
        """data symbols -> systematic codeword (data + parity)."""
        data = list(data)
        if len(data) > self.max_data_len:
            raise ValueError("message too long for the field")
        gf = self.gf
        gen = self.gen_poly
        parity = [0] * self.nsym
        for symbol in data:
            coef = symbol ^ parity[0]
            parity = parity[1:] + [0]
            if coef:
                for i in range(self.nsym):
                    parity[i] ^= gf.mul(gen[i + 1], coef)
        return bytes(data + parity) if self.gf.c_exp == 8 else data + parity

    def decode(self, codeword):
        """Codeword -> corrected data symbols, or RSDecodeFailure."""
        msg = list(codeword)
        if len(msg) > self.gf.field_charac:
            raise ValueError("codeword too long for the field")
        gf = self.gf
        synd = [gf.poly_eval(msg, gf.pow(gf.generator, i)) for i in range(self.nsym)]
        if max(synd) == 0:
            data = msg[:-self.nsym]
            return bytes(data) if gf.c_exp == 8 else data

        err_loc = self._berlekamp_massey(synd)
        errs = len(err_loc) - 1
        if errs * 2 > self.nsym:
            raise RSDecodeFailure("too many errors (locator degree %d)" % errs)
        err_pos = self._find_errors(err_loc[::-1], len(msg))
        msg = self._correct_errata(msg, synd, err_pos)
        # re-check: corrected word must be a valid codeword
        for i in range(self.nsym):
            if gf.poly_eval(msg, gf.pow(gf.generator, i)) != 0:
                raise RSDecodeFailure("correction failed to cancel syndromes")
        data = msg[:-self.nsym]
        return bytes(data) if gf.c_exp == 8 else data

    def _berlekamp_massey(self, synd):
        gf = self.gf
        err_loc = [1]
        old_loc = [1]
        for i in range(self.nsym):
            delta = synd[i]
            for j in range(1, len(err_loc)):
                delta ^= gf.mul(err_loc[-(j + 1)], synd[i - j])
            old_loc = old_loc + [0]
            if delta != 0:
                if len(old_loc) > len(err_loc):
                    new_loc = gf.poly_scale(old_loc, delta)
                    old_loc = gf.poly_scale(err_loc, gf.inverse(delta))
                    err_loc = new_loc
                err_loc = gf.poly_add(err_loc, gf.poly_scale(old_loc, delta))
        while len(err_loc) and err_loc[0] == 0:
            err_loc = err_loc[1:]
        return err_loc

    def _find_errors(self, err_loc, nmess):
        gf = self.gf
        errs = len(err_loc) - 1
        err_pos = []
        for i in range(nmess):
            if gf.poly_eval(err_loc, gf.pow(gf.generator, i)) == 0:
                err_pos.append(nmess - 1 - i)
        if len(err_pos) != errs:
            raise RSDecodeFailure("error locator roots do not match degree")
        return err_pos

    def _correct_errata(self, msg, synd, err_pos):
        gf = self.gf
        coef_pos = [len(msg) - 1 - p for p in err_pos]
        # errata locator from the known positions
        loc = [1]
        for p in coef_pos:
            loc = gf.poly_mul(loc, gf.poly_add([1], [gf.pow(gf.generator, p), 0]))
        # error evaluator = (reversed-syndrome * locator) mod x^(deg(loc)+1)
        product = gf.poly_mul(synd[::-1], loc)
        eval_poly = product[-len(loc):]
        X = [gf.pow(gf.generator, -(gf.field_charac - p)) for p in coef_pos]
        E = [0] * len(msg)
        for i, Xi in enumerate(X):
            Xi_inv = gf.inverse(Xi)
            loc_prime = 1
            for j, Xj in enumerate(X):
                if j != i:
                    loc_prime = gf.mul(loc_prime, 1 ^ gf.mul(Xi_inv, Xj))
            if loc_prime == 0:
                raise RSDecodeFailure("degenerate error locator derivative")
            # Forney with fcr=0: Xi^1 in the numerator cancels against the
            # Xi factored out of the locator derivative
            y = gf.poly_eval(eval_poly, Xi_inv)
            E[err_pos[i]] = gf.div(y, loc_prime)
        return [m ^ e for m, e in zip(msg, E)]
