# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled grid-scan kernels; mirrors _pure.py exactly."""


def first_fit(const unsigned char[:, ::1] occ, const long long[::1] links, int width):
    """Lowest start slot of a width-wide window free on every listed link.

    Skip-scan: on hitting a busy slot inside the trial window, jump the
    window start just past the highest busy slot found.
    """
    cdef Py_ssize_t num_slots = occ.shape[1]
    cdef Py_ssize_t num_links = links.shape[0]
    cdef Py_ssize_t s = 0, f, j, blocked
    if width < 1 or width > num_slots:
        return -1
    while s + width <= num_slots:
        blocked = -1
        f = s + width - 1
        while f >= s:
            for j in range(num_links):
                if occ[links[j], f]:
                    blocked = f
                    break
            if blocked >= 0:
                break
            f -= 1
        if blocked < 0:
            return s
        s = blocked + 1
    return -1


def window_free(const unsigned char[:, ::1] occ, const long long[::1] links,
                int start, int width):
    """True when slots [start, start+width) are free on every listed link."""
    cdef Py_ssize_t j, f
    if start < 0 or start + width > occ.shape[1]:
        return False
    for j in range(links.shape[0]):
        for f in range(start, start + width):
            if occ[links[j], f]:
                return False
    return True
