"""Integer-heavy inner loops.

Each function is numba-compiled when numba is importable and not disabled by
``SPECTRALCORR_DISABLE_NUMBA``; otherwise it runs as ordinary Python on numpy
arrays. Inputs are plain int64-sized integers; callers range-check them.
"""

import math

import numpy as np

from ._jit import njit


@njit
def isqrt64(n):
    if n < 0:
        return -1
    r = np.int64(math.sqrt(float(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit
def gcd64(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit
def kronecker(D, n):
    """Kronecker symbol (D / n) for n >= 1."""
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v > 0:
        if D % 2 == 0:
            return 0
        if v % 2 == 1 and (D % 8 == 3 or D % 8 == 5):
            result = -result
    # Jacobi symbol (D / n), n odd positive
    a = D % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r8 = n % 8
            if r8 == 3 or r8 == 5:
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a = a % n
    if n == 1:
        return result
    return 0


@njit
def mobius_sieve(N):
    mu = np.ones(N + 1, dtype=np.int8)
    mu[0] = 0
    is_comp = np.zeros(N + 1, dtype=np.bool_)
    for p in range(2, N + 1):
        if not is_comp[p]:
            for k in range(p, N + 1, p):
                if k > p:
                    is_comp[k] = True
                mu[k] = -mu[k]
            pp = p * p
            for k in range(pp, N + 1, pp):
                mu[k] = 0
    return mu


@njit
def von_mangoldt_sieve(N):
    """Array with Lambda(n) at index n, 0 <= n <= N."""
    lam = np.zeros(N + 1, dtype=np.float64)
    is_comp = np.zeros(N + 1, dtype=np.bool_)
    for p in range(2, N + 1):
        if not is_comp[p]:
            for k in range(2 * p, N + 1, p):
                is_comp[k] = True
            lp = math.log(p)
            q = p
            while q <= N:
                lam[q] = lp
                if q > N // p:
                    break
                q *= p
    return lam


@njit
def definite_class_number(D):
    """Number of reduced primitive positive definite forms of discriminant D < 0."""
    absD = -D
    h = 0
    a = 1
    while 3 * a * a <= absD:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a) != 0:
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if c == a and b < 0:
                continue
            if gcd64(gcd64(a, b), c) != 1:
                continue
            h += 1
        a += 1
    return h


@njit
def _reduced_indefinite(D, r):
    """Keys and (a, b) of reduced primitive forms of discriminant D > 0.

    Reduced means |sqrt(D) - 2|a|| < b < sqrt(D); with r = floor(sqrt(D)) this
    is r - b + 1 <= 2|a| <= r + b and 1 <= b <= r.
    """
    count = 0
    for b in range(1, r + 1):
        if (b - D) % 2 != 0:
            continue
        N = (D - b * b) // 4
        lo = (r - b + 2) // 2
        hi = (r + b) // 2
        for A in range(max(lo, 1), hi + 1):
            if N % A == 0 and gcd64(gcd64(A, b), N // A) == 1:
                count += 2
    aa = np.empty(count, dtype=np.int64)
    bb = np.empty(count, dtype=np.int64)
    i = 0
    for b in range(1, r + 1):
        if (b - D) % 2 != 0:
            continue
        N = (D - b * b) // 4
        lo = (r - b + 2) // 2
        hi = (r + b) // 2
        for A in range(max(lo, 1), hi + 1):
            if N % A == 0 and gcd64(gcd64(A, b), N // A) == 1:
                aa[i] = A
                bb[i] = b
                aa[i + 1] = -A
                bb[i + 1] = b
                i += 2
    keys = (aa + r) * (r + 1) + bb
    order = np.argsort(keys)
    return keys[order], aa[order], bb[order]


@njit
def narrow_class_number_indefinite(D):
    """Number of rho-cycles of reduced primitive forms, i.e. the narrow class number."""
    r = isqrt64(D)
    keys, aa, bb = _reduced_indefinite(D, r)
    n = keys.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    cycles = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            a = aa[j]
            b = bb[j]
            c = (b * b - D) // (4 * a)
            ac = abs(c)
            b2 = r - ((r + b) % (2 * ac))
            a2 = c
            key = (a2 + r) * (r + 1) + b2
            j = np.searchsorted(keys, key)
            if j >= n or keys[j] != key:
                return -1
    return cycles


@njit
def cf_unit_log(D, max_steps):
    """Continued fraction of (s + sqrt D)/2, s = D mod 2, over one period.

    Returns (period length, log of the fundamental unit). The unit has norm
    (-1)**period. Period length -1 means ``max_steps`` was exceeded.
    """
    s = D % 2
    r = isqrt64(D)
    sq = math.sqrt(float(D))
    P = s
    Q = 2
    total = 0.0
    k = 0
    while True:
        a = (P + r) // Q
        P = a * Q - P
        Q = (D - P * P) // Q
        k += 1
        total += math.log((P + sq) / Q)
        if Q == 2:
            return k, total
        if k >= max_steps:
            return -1, total


@njit
def kronecker_sum_imag(D):
    """Sum over 1 <= n < |D| of (D/n) * n."""
    total = 0
    for n in range(1, -D):
        total += kronecker(D, n) * n
    return total


@njit
def kronecker_sum_real(D):
    """Sum over 1 <= n < D of (D/n) * log sin(pi n / D)."""
    total = 0.0
    for n in range(1, D):
        k = kronecker(D, n)
        if k != 0:
            total += k * math.log(math.sin(math.pi * n / D))
    return total


@njit
def _gauss_reduce_definite(a, b, c):
    while True:
        if c < a or (c == a and b < 0):
            a, b, c = c, -b, a
            continue
        if b > a or b <= -a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            continue
        return a, b, c


@njit
def enumerate_definite_classes(D, box):
    """Reduce every primitive positive form with a, |b| <= box and count distinct results."""
    keys = np.empty(0, dtype=np.int64)
    buf = np.empty(16, dtype=np.int64)
    n = 0
    for a in range(1, box + 1):
        for b in range(-box, box + 1):
            num = b * b - D
            if num % (4 * a) != 0:
                continue
            c = num // (4 * a)
            if gcd64(gcd64(a, b), c) != 1:
                continue
            ra, rb, rc = _gauss_reduce_definite(a, b, c)
            key = ra * (4 * box + 8) + (rb + 2 * box + 4)
            if n == buf.shape[0]:
                nb = np.empty(2 * n, dtype=np.int64)
                nb[:n] = buf[:n]
                buf = nb
            buf[n] = key
            n += 1
    keys = np.unique(buf[:n])
    return keys.shape[0]


@njit
def _uf_find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit
def conjugacy_components(t, det, m, bound, gens, unoriented):
    """Union-find count of matrices [[a,b],[c,d]] with a + d = t, ad - bc = det,
    m | c and all entries in [-bound, bound], joined whenever a generator
    (or its inverse, both supplied in ``gens``) conjugates one into another.

    With ``unoriented`` each matrix is also joined to its adjugate.
    Returns (number of matrices, number of components).
    """
    base = 2 * bound + 1
    cnt = 0
    for a in range(-bound, bound + 1):
        d = t - a
        if d < -bound or d > bound:
            continue
        N = a * d - det
        if N == 0:
            continue
        for b in range(1, bound + 1):
            if N % b != 0:
                continue
            c = N // b
            if abs(c) <= bound and c % m == 0:
                cnt += 2
    keys = np.empty(cnt, dtype=np.int64)
    i = 0
    for a in range(-bound, bound + 1):
        d = t - a
        if d < -bound or d > bound:
            continue
        N = a * d - det
        if N == 0:
            continue
        for b in range(1, bound + 1):
            if N % b != 0:
                continue
            c = N // b
            if abs(c) <= bound and c % m == 0:
                keys[i] = ((a + bound) * base + (b + bound)) * base + (c + bound)
                keys[i + 1] = ((a + bound) * base + (-b + bound)) * base + (-c + bound)
                i += 2
    keys = np.sort(keys)
    n = keys.shape[0]
    parent = np.arange(n)
    ng = gens.shape[0]
    for idx in range(n):
        key = keys[idx]
        cc = key % base - bound
        rest = key // base
        b = rest % base - bound
        a = rest // base - bound
        d = t - a
        for g in range(ng):
            p = gens[g, 0, 0]
            q = gens[g, 0, 1]
            r = gens[g, 1, 0]
            s = gens[g, 1, 1]
            # g M g^{-1}, g^{-1} = [[s, -q], [-r, p]] (det g = 1)
            x00 = p * a + q * cc
            x01 = p * b + q * d
            x10 = r * a + s * cc
            x11 = r * b + s * d
            a2 = x00 * s - x01 * r
            b2 = -x00 * q + x01 * p
            c2 = x10 * s - x11 * r
            if abs(a2) > bound or abs(b2) > bound or abs(c2) > bound:
                continue
            if abs(t - a2) > bound:
                continue
            k2 = ((a2 + bound) * base + (b2 + bound)) * base + (c2 + bound)
            j = np.searchsorted(keys, k2)
            if j < n and keys[j] == k2:
                ri = _uf_find(parent, idx)
                rj = _uf_find(parent, j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
        if unoriented:
            # adjugate [[d, -b], [-c, a]]
            k2 = ((d + bound) * base + (-b + bound)) * base + (-cc + bound)
            j = np.searchsorted(keys, k2)
            if j < n and keys[j] == k2:
                ri = _uf_find(parent, idx)
                rj = _uf_find(parent, j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    comps = 0
    for idx in range(n):
        if _uf_find(parent, idx) == idx:
            comps += 1
    return n, comps
