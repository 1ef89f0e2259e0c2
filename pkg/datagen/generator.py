"""
Synthetic hierarchy-correlated spectral images with sparse blob annotations.

Class spectra are built top-down: every node adds a random offset to its
parent's spectrum, so classes that share more ancestors end up closer in
spectral space.
"""

import logging

import numpy as np

from hierarchy.models import LabelTree, TreeNode
from hierarchy.tree import build_tree

from .exceptions import AnnotationBudgetError, InvalidSpecError
from .models import (
    OOD,
    UNANNOTATED,
    AnnotationField,
    Dataset,
    GeneratedImage,
    GenSpec,
    SpectralImage,
)

logger = logging.getLogger(__name__)

# Stream ids mixed into the seed so means and images never share draws
_MEANS_STREAM = 0
_IMAGE_STREAM = 1


def gen_tree(spec: GenSpec) -> LabelTree:
    """Balanced three-level tree: tops x mids x leaves, plus optional extra tops.

    Node ids follow breadth-first order (root 0, then tops, mids, leaves), so
    leaf class codes run branch by branch.
    """
    nodes = [TreeNode(id=0, name="root", parent=None)]
    next_id = 1

    tops: list[tuple[int, str, int]] = []
    for t in range(spec.tops):
        tops.append((next_id, f"T{t + 1}", spec.mids_per_top))
        next_id += 1
    for x in range(spec.extra_tops):
        tops.append((next_id, f"X{x + 1}", 1))
        next_id += 1
    nodes.extend(TreeNode(id=top_id, name=name, parent=0) for top_id, name, _ in tops)

    mids: list[tuple[int, str, int]] = []
    for top_id, top_name, n_mids in tops:
        n_leaves = spec.leaves_per_mid if top_name.startswith("T") else 1
        for m in range(n_mids):
            name = f"{top_name}.M{m + 1}"
            nodes.append(TreeNode(id=next_id, name=name, parent=top_id))
            mids.append((next_id, name, n_leaves))
            next_id += 1

    for mid_id, mid_name, n_leaves in mids:
        for leaf in range(n_leaves):
            nodes.append(TreeNode(id=next_id, name=f"{mid_name}.L{leaf + 1}", parent=mid_id))
            next_id += 1

    return build_tree(nodes)


def class_means(tree: LabelTree, spec: GenSpec) -> np.ndarray:
    """(C, bands) leaf mean spectra; each node adds an offset scaled by its depth."""
    rng = np.random.default_rng([spec.seed, _MEANS_STREAM])
    spreads = (spec.top_spread, spec.mid_spread, spec.leaf_spread)

    spectrum: dict[int, np.ndarray] = {tree.root_id: np.full(spec.bands, spec.base_level)}
    # Ascending id is breadth-first for generated trees; sort by depth for any other tree
    depth = {node_id: len(tree.ancestors(node_id)) - 1 for node_id in tree.node_ids}
    for node_id in sorted(tree.node_ids, key=lambda n: (depth[n], n)):
        parent = tree.node(node_id).parent
        if parent is None:
            continue
        spread = spreads[min(depth[node_id], len(spreads)) - 1]
        spectrum[node_id] = spectrum[parent] + spread * rng.standard_normal(spec.bands)

    return np.stack([spectrum[leaf] for leaf in tree.leaf_order])


def _region_map(rng: np.random.Generator, spec: GenSpec) -> np.ndarray:
    """Voronoi partition of the image around random sites; returns site index per pixel."""
    sites = rng.uniform(0.0, 1.0, size=(spec.regions_per_image, 2)) * (spec.height, spec.width)
    rows, cols = np.mgrid[0:spec.height, 0:spec.width]
    grid = np.stack([rows, cols], axis=-1).astype(np.float64)
    dist = np.sum((grid[:, :, None, :] - sites[None, None, :, :]) ** 2, axis=-1)
    return np.argmin(dist, axis=-1)


def _interior(regions: np.ndarray) -> np.ndarray:
    """Pixels whose 4-neighbours all share their region; boundaries stay unannotated."""
    inside = np.ones(regions.shape, dtype=bool)
    inside[1:, :] &= regions[1:, :] == regions[:-1, :]
    inside[:-1, :] &= regions[:-1, :] == regions[1:, :]
    inside[:, 1:] &= regions[:, 1:] == regions[:, :-1]
    inside[:, :-1] &= regions[:, :-1] == regions[:, 1:]
    return inside


def _blob_mask(
    rng: np.random.Generator,
    spec: GenSpec,
    allowed: np.ndarray,
    regions: np.ndarray,
) -> np.ndarray:
    """Random ellipse centred on an allowed pixel, clipped to that pixel's region.

    Returns flat pixel indices sorted by distance to the centre.
    """
    candidates = np.flatnonzero(allowed)
    center = candidates[rng.integers(candidates.size)]
    cy, cx = divmod(int(center), spec.width)
    ry, rx = rng.uniform(*spec.blob_radius_range, size=2)
    angle = rng.uniform(0.0, np.pi)

    reach = int(np.ceil(max(ry, rx)))
    y0, y1 = max(cy - reach, 0), min(cy + reach + 1, spec.height)
    x0, x1 = max(cx - reach, 0), min(cx + reach + 1, spec.width)
    ys, xs = np.mgrid[y0:y1, x0:x1]
    dy, dx = ys - cy, xs - cx
    cos, sin = np.cos(angle), np.sin(angle)
    u = (dy * cos + dx * sin) / ry
    v = (-dy * sin + dx * cos) / rx
    radius = u ** 2 + v ** 2

    inside = (radius <= 1.0) & allowed[y0:y1, x0:x1] & (regions[y0:y1, x0:x1] == regions[cy, cx])
    flat = (ys * spec.width + xs)[inside]
    order = np.argsort(radius[inside], kind="stable")
    return flat[order]


def _annotate(rng: np.random.Generator, spec: GenSpec, regions: np.ndarray) -> np.ndarray:
    """Boolean mask with exactly round(fraction * H * W) annotated pixels in blobs."""
    total = spec.height * spec.width
    target = int(round(spec.annotated_fraction * total))
    allowed = _interior(regions)
    available = int(np.count_nonzero(allowed))
    if target > available:
        raise AnnotationBudgetError(
            f"Requested {target} annotated pixels but only {available} interior pixels exist",
            requested=target,
            available=available,
        )

    annotated = np.zeros(regions.shape, dtype=bool)
    count = 0
    while count < target:
        blob = _blob_mask(rng, spec, allowed, regions)
        # Last blob is trimmed to its innermost pixels
        blob = blob[: target - count]
        annotated.flat[blob] = True
        allowed.flat[blob] = False
        count += blob.size
    return annotated


def gen_image(index: int, means: np.ndarray, spec: GenSpec) -> GeneratedImage:
    """One image, fully determined by (spec.seed, index)."""
    rng = np.random.default_rng([spec.seed, _IMAGE_STREAM, index])
    n_classes = means.shape[0]

    regions = _region_map(rng, spec)
    region_class = rng.integers(0, n_classes, size=spec.regions_per_image)
    classes = region_class[regions]

    noise = rng.standard_normal((spec.height, spec.width, spec.bands))
    cube = means[classes] + spec.noise_scale * noise
    low, high = spec.illumination_range
    if high > low:
        cube *= rng.uniform(low, high, size=(spec.height, spec.width, 1))
    elif low != 1.0:
        cube *= low
    cube = np.clip(cube, 0.0, None).astype(np.float32)

    annotated = _annotate(rng, spec, regions)
    codes = (classes + 1).astype(np.int32)
    labels = np.where(annotated, codes, UNANNOTATED).astype(np.int32)

    ood_annotation = None
    if spec.held_out_leaves:
        held_out = np.isin(labels, spec.held_out_leaves)
        ood_annotation = AnnotationField(np.where(held_out, OOD, labels).astype(np.int32))
        labels = np.where(held_out, UNANNOTATED, labels).astype(np.int32)

    return GeneratedImage(
        image=SpectralImage(cube),
        annotation=AnnotationField(labels),
        ood_annotation=ood_annotation,
    )


def gen_dataset(tree: LabelTree, spec: GenSpec) -> Dataset:
    """Generate ``spec.n_images`` images whose leaf classes follow ``tree``.

    Raises:
        InvalidSpecError: the tree's leaf count disagrees with held-out leaf codes
        AnnotationBudgetError: an image has too few interior pixels for the
            requested annotated fraction
    """
    if any(code > tree.C for code in spec.held_out_leaves):
        raise InvalidSpecError(
            f"held_out_leaves must be class codes in 1..{tree.C}", field_name="held_out_leaves"
        )
    means = class_means(tree, spec)
    images = [gen_image(i, means, spec) for i in range(spec.n_images)]
    logger.info(
        "Generated %d images of %dx%dx%d over %d classes",
        spec.n_images, spec.height, spec.width, spec.bands, tree.C,
    )
    return Dataset(tree=tree, images=images, spec=spec)
