"""Brute-force reference computations for the grid complex.

Gradings come straight from the southwest-pair counts on explicit
coordinates, rectangles from their cell sets on the torus, and homology from
dense GF(2) elimination on numpy arrays. Slow on purpose; keep δ <= 5.
"""
import itertools
from fractions import Fraction

import numpy as np


def _southwest_pairs(first, second):
    return sum(1 for a in first for b in second if a[0] < b[0] and a[1] < b[1])


def _symmetric_pairs(first, second):
    return Fraction(_southwest_pairs(first, second) + _southwest_pairs(second, first), 2)


def _maslov(points, markings):
    return (
        _symmetric_pairs(points, points)
        - 2 * _symmetric_pairs(points, markings)
        + _symmetric_pairs(markings, markings)
        + 1
    )


def gradings(g, match):
    half = Fraction(1, 2)
    points = [(column, row) for column, row in enumerate(match)]
    os = [(column + half, row + half) for column, row in enumerate(g.os)]
    xs = [(column + half, row + half) for column, row in enumerate(g.xs)]
    maslov_o, maslov_x = _maslov(points, os), _maslov(points, xs)
    alexander = (maslov_o - maslov_x - (g.size - 1)) / 2
    return int(maslov_o), alexander.numerator if alexander.denominator == 1 else alexander


def _rectangle_is_empty(g, match, left, right):
    size = g.size
    width = (right - left) % size
    bottom, top = match[left], match[right]
    height = (top - bottom) % size
    cells = {((left + i) % size, (bottom + j) % size) for i in range(width) for j in range(height)}
    for column in range(size):
        if (column, g.xs[column]) in cells or (column, g.os[column]) in cells:
            return False
    for column, row in enumerate(match):
        if 0 < (column - left) % size < width and 0 < (row - bottom) % size < height:
            return False
    return True


def boundary_matrix(g):
    """(states, gradings, D) with D[i, j] the mod 2 count of rectangles from state i to state j."""
    states = list(itertools.permutations(range(g.size)))
    index = {state: position for position, state in enumerate(states)}
    matrix = np.zeros((len(states), len(states)), dtype=np.uint8)
    for position, match in enumerate(states):
        for left, right in itertools.permutations(range(g.size), 2):
            if _rectangle_is_empty(g, match, left, right):
                target = list(match)
                target[left], target[right] = match[right], match[left]
                matrix[position, index[tuple(target)]] ^= 1
    return states, [gradings(g, state) for state in states], matrix


def gf2_rank(matrix):
    work = (np.asarray(matrix, dtype=np.uint8) % 2).copy()
    rows, columns = work.shape
    rank = 0
    for column in range(columns):
        pivots = np.nonzero(work[rank:, column])[0]
        if pivots.size == 0:
            continue
        pivot = rank + pivots[0]
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        below = np.nonzero(work[:, column])[0]
        for row in below:
            if row != rank:
                work[row] ^= work[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def squares_to_zero(matrix):
    wide = matrix.astype(np.int64)
    return not ((wide @ wide) % 2).any()


def homology(g):
    """{(maslov, alexander): dim} of the tilde complex."""
    _, grades, matrix = boundary_matrix(g)
    blocks = {}
    for position, key in enumerate(grades):
        blocks.setdefault(key, []).append(position)
    out_rank = {}
    for key, members in blocks.items():
        target = blocks.get((key[0] - 1, key[1]), [])
        out_rank[key] = gf2_rank(matrix[np.ix_(members, target)]) if target else 0
    dims = {}
    for key, members in blocks.items():
        incoming = out_rank.get((key[0] + 1, key[1]), 0)
        dim = len(members) - out_rank[key] - incoming
        if dim:
            dims[key] = dim
    return dims
