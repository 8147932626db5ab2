# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled embedding backtracker.

Consumes the plan built by ovlab._search.build_plan.  Relations of G are
held as dense byte tables indexed by the mixed-radix code of a tuple, and
candidate generation uses CSR indexes keyed by the code of the other entries.
"""
from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memset

cdef enum:
    MAXA = 8

cdef Py_ssize_t TABLE_CAP = 1 << 27


def search(plan, target, long long limit=0, bint collect=False):
    cdef int nh = plan.nh
    cdef int ng = target.ng
    cdef int nrel = len(plan.arities)
    cdef int i, j, d, p, a, ri, w, ok, nidx
    cdef Py_ssize_t code, sz, k
    cdef long long count = 0

    if nh == 0:
        return 1, [()]
    if nh > ng:
        return 0, []
    for a in plan.arities:
        if a > MAXA:
            raise ValueError("arity above compiled limit")

    cdef Py_ssize_t *pw = <Py_ssize_t *> malloc((MAXA + 1) * sizeof(Py_ssize_t))
    pw[0] = 1
    for i in range(1, MAXA + 1):
        pw[i] = pw[i - 1] * ng if pw[i - 1] < TABLE_CAP else TABLE_CAP

    # dense membership tables
    cdef int *ar = <int *> malloc(nrel * sizeof(int))
    cdef Py_ssize_t *moff = <Py_ssize_t *> malloc((nrel + 1) * sizeof(Py_ssize_t))
    moff[0] = 0
    for ri in range(nrel):
        ar[ri] = plan.arities[ri]
        if pw[ar[ri]] >= TABLE_CAP:
            free(pw); free(ar); free(moff)
            raise ValueError("target too large for dense tables")
        moff[ri + 1] = moff[ri] + pw[ar[ri]]
    cdef unsigned char *mem = <unsigned char *> calloc(moff[nrel] + 1, 1)
    for ri in range(nrel):
        a = ar[ri]
        for t in target.tuples[ri]:
            code = 0
            for j in range(a):
                code += (<int> t[j] - 1) * pw[j]
            mem[moff[ri] + code] = 1

    # flattened checks
    cdef int nchk = 0
    for lst in plan.checks:
        nchk += len(lst)
    cdef int *cstart = <int *> malloc((nh + 1) * sizeof(int))
    cdef int *crel = <int *> malloc((nchk + 1) * sizeof(int))
    cdef int *cexp = <int *> malloc((nchk + 1) * sizeof(int))
    cdef int *cidx = <int *> malloc((nchk + 1) * MAXA * sizeof(int))
    k = 0
    for d in range(nh):
        cstart[d] = k
        for (r_, idxs, exp) in plan.checks[d]:
            crel[k] = r_
            cexp[k] = 1 if exp else 0
            for j in range(len(idxs)):
                cidx[k * MAXA + j] = idxs[j]
            k += 1
    cstart[nh] = k

    # candidate sources: CSR over codes of the other entries
    cdef int *shas = <int *> malloc(nh * sizeof(int))
    cdef int *snid = <int *> malloc(nh * sizeof(int))
    cdef int *sidx = <int *> malloc(nh * MAXA * sizeof(int))
    cdef Py_ssize_t **sptr = <Py_ssize_t **> calloc(nh, sizeof(Py_ssize_t *))
    cdef int **sval = <int **> calloc(nh, sizeof(int *))
    cdef Py_ssize_t *ptr
    cdef int *vals
    cdef Py_ssize_t nkeys, total
    built = {}
    for d in range(nh):
        src = plan.sources[d]
        shas[d] = 0
        if src is None:
            continue
        ri, p, others = src
        shas[d] = 1
        snid[d] = len(others)
        for j in range(len(others)):
            sidx[d * MAXA + j] = others[j]
        if (ri, p) in built:
            dd = built[(ri, p)]
            sptr[d] = sptr[dd]
            sval[d] = sval[dd]
            continue
        a = ar[ri]
        nkeys = pw[a - 1]
        ptr = <Py_ssize_t *> calloc(nkeys + 1, sizeof(Py_ssize_t))
        tl = target.tuples[ri]
        total = len(tl)
        vals = <int *> malloc((total + 1) * sizeof(int))
        for t in tl:
            code = 0
            i = 0
            for j in range(a):
                if j != p:
                    code += (<int> t[j] - 1) * pw[i]
                    i += 1
            ptr[code + 1] += 1
        for code in range(nkeys):
            ptr[code + 1] += ptr[code]
        fill = <Py_ssize_t *> malloc((nkeys + 1) * sizeof(Py_ssize_t))
        for code in range(nkeys + 1):
            fill[code] = ptr[code]
        for t in tl:
            code = 0
            i = 0
            for j in range(a):
                if j != p:
                    code += (<int> t[j] - 1) * pw[i]
                    i += 1
            vals[fill[code]] = <int> t[p]
            fill[code] += 1
        free(fill)
        sptr[d] = ptr
        sval[d] = vals
        built[(ri, p)] = d

    # depth-first search with explicit stack
    cdef int *phi = <int *> calloc(nh, sizeof(int))
    cdef unsigned char *used = <unsigned char *> calloc(ng + 1, 1)
    cdef Py_ssize_t *pos = <Py_ssize_t *> calloc(nh, sizeof(Py_ssize_t))
    cdef Py_ssize_t *clen = <Py_ssize_t *> calloc(nh, sizeof(Py_ssize_t))
    cdef int **cand = <int **> calloc(nh, sizeof(int *))
    maps = []

    d = 0
    pos[0] = 0
    if shas[0]:
        cand[0] = sval[0] + sptr[0][0]
        clen[0] = sptr[0][1] - sptr[0][0]
    else:
        cand[0] = NULL
        clen[0] = ng
    while d >= 0:
        if pos[d] >= clen[d]:
            d -= 1
            if d >= 0:
                used[phi[d]] = 0
            continue
        if cand[d] != NULL:
            w = cand[d][pos[d]]
        else:
            w = <int> pos[d] + 1
        pos[d] += 1
        if used[w]:
            continue
        phi[d] = w
        ok = 1
        for k in range(cstart[d], cstart[d + 1]):
            ri = crel[k]
            code = 0
            for j in range(ar[ri]):
                code += (phi[cidx[k * MAXA + j]] - 1) * pw[j]
            if mem[moff[ri] + code] != cexp[k]:
                ok = 0
                break
        if not ok:
            continue
        if d == nh - 1:
            count += 1
            if collect:
                maps.append(tuple([phi[i] for i in range(nh)]))
            if limit > 0 and count >= limit:
                break
            continue
        used[w] = 1
        d += 1
        pos[d] = 0
        if shas[d]:
            nidx = snid[d]
            code = 0
            for j in range(nidx):
                code += (phi[sidx[d * MAXA + j]] - 1) * pw[j]
            cand[d] = sval[d] + sptr[d][code]
            clen[d] = sptr[d][code + 1] - sptr[d][code]
        else:
            cand[d] = NULL
            clen[d] = ng

    for d in range(nh):
        if shas[d] and built.get(tuple(plan.sources[d][:2])) == d:
            free(sptr[d])
            free(sval[d])
    free(sptr); free(sval); free(shas); free(snid); free(sidx)
    free(phi); free(used); free(pos); free(clen); free(cand)
    free(cstart); free(crel); free(cexp); free(cidx)
    free(mem); free(moff); free(ar); free(pw)
    return count, maps
