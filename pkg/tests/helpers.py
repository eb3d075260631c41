"""Shared builders for lattice and parse test inputs."""
from __future__ import annotations

import random

from jointparse.core import (
    DepTree,
    LatticeArc,
    MorphFeatures,
    MorphPath,
    SentenceLattice,
    check_projective,
    enumerate_paths,
    validate_lattice,
)

LABEL_POOL = ("subj", "obj", "det", "prepmod")


def arc(f: int, t: int, form: str, pos: str = "NN", lemma: str | None = None,
        feats: str = "_", token: int = 1) -> LatticeArc:
    return LatticeArc(f, t, form, lemma if lemma is not None else form,
                      pos, MorphFeatures.parse(feats), token)


def diamond_lattice() -> SentenceLattice:
    arcs = (
        arc(0, 1, "h", pos="DEF"),
        arc(0, 2, "hbn", pos="VB"),
        arc(1, 2, "bn", pos="NN"),
        arc(2, 3, "ql", pos="VB", token=2),
    )
    return SentenceLattice(
        tokens=("hbn", "ql"), arcs=arcs, end_node=3,
        token_boundaries=((0, 2), (2, 3)))


def random_valid_lattice(rng: random.Random, max_tokens: int = 4) -> SentenceLattice:
    """Draw random token-tiled DAGs until one passes validation."""
    while True:
        n_tokens = rng.randint(1, max_tokens)
        boundaries = []
        arcs: list[LatticeArc] = []
        entry = 0
        pos_pool = ("NN", "VB", "DEF", "IN")
        for t in range(1, n_tokens + 1):
            width = rng.randint(1, 3)
            exit_ = entry + width
            node = entry
            while node < exit_:
                step = rng.randint(1, exit_ - node)
                arcs.append(arc(node, node + step, f"f{node}_{node + step}",
                                pos=rng.choice(pos_pool), token=t))
                node += step
            for _ in range(rng.randint(0, 3)):
                a = rng.randint(entry, exit_ - 1)
                b = rng.randint(a + 1, exit_)
                candidate = arc(a, b, f"f{a}_{b}", pos=rng.choice(pos_pool), token=t)
                if candidate not in arcs:
                    arcs.append(candidate)
            boundaries.append((entry, exit_))
            entry = exit_
        lattice = SentenceLattice(
            tokens=tuple(f"t{i}" for i in range(1, n_tokens + 1)),
            arcs=tuple(arcs), end_node=entry,
            token_boundaries=tuple(boundaries))
        if not validate_lattice(lattice):
            return lattice


def random_projective_tree(rng: random.Random, path: MorphPath) -> DepTree:
    """Rejection-sample a projective tree over the path morphemes."""
    n = len(path.arcs)
    while True:
        edges = []
        for dep in range(1, n + 1):
            head = rng.choice([h for h in range(0, n + 1) if h != dep])
            label = "ROOT" if head == 0 else rng.choice(LABEL_POOL)
            edges.append((head, dep, label))
        try:
            tree = DepTree(path.arcs, tuple(edges))
        except ValueError:
            continue
        if check_projective(tree):
            return tree


def random_parse(rng: random.Random,
                 lattice: SentenceLattice) -> tuple[MorphPath, DepTree]:
    path = rng.choice(enumerate_paths(lattice))
    return path, random_projective_tree(rng, path)
