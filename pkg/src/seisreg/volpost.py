"""Volume-wide prediction sweep and 3-D median post-filtering.

Both operations are per-voxel independent over immutable inputs.  The
median is taken over the valid (unmasked, in-bounds) neighbours including
the voxel itself; boundary and masked neighbours simply shrink the set.
Even-cardinality sets take the lower median so results are deterministic.
"""

import itertools

import numpy as np

from .errors import DataError
from .formats.volume import SeismicVolume
from .mlp import ModelBundle


class GeometryMismatch(DataError):
    pass


class EmptyNeighborhood(DataError):
    pass


def predict_volume(bundle: ModelBundle, attrs: list) -> SeismicVolume:
    """Apply the trained model voxel-wise over aligned attribute volumes.

    attrs must share geometry exactly; the output mask is the AND of the
    input masks (a voxel with any attribute missing stays missing).
    """
    if len(attrs) != bundle.model.n_in:
        raise GeometryMismatch(
            f"model expects {bundle.model.n_in} attribute volumes, got {len(attrs)}"
        )
    first = attrs[0]
    for other in attrs[1:]:
        if not first.same_geometry(other):
            raise GeometryMismatch("attribute volumes do not share geometry")
    mask = np.logical_and.reduce([v.mask for v in attrs])
    flat_inputs = np.stack([v.data.ravel() for v in attrs], axis=1)
    predictions = bundle.predict(flat_inputs).reshape(first.data.shape)
    predictions[~mask] = 0.0
    return SeismicVolume(
        inlines=first.inlines.copy(),
        xlines=first.xlines.copy(),
        t0_ms=first.t0_ms,
        dt_ms=first.dt_ms,
        data=predictions,
        attribute_name="sand_fraction",
        mask=mask,
    )


def median_filter_3d(vol: SeismicVolume, window=3) -> SeismicVolume:
    """Order-statistic smoothing over a window x window x window neighbourhood.

    For the full 27-point window this picks the 14th largest value;
    shrunken (boundary or masked) neighbourhoods use the lower median of
    whatever is valid.
    """
    if isinstance(window, int):
        window = (window, window, window)
    if any(w < 1 or w % 2 == 0 for w in window):
        raise DataError(f"window edges must be odd and >= 1, got {window}")
    half = [w // 2 for w in window]
    data = vol.data
    valid = vol.mask

    offsets = list(itertools.product(*(range(-h, h + 1) for h in half)))
    stack = np.full((len(offsets),) + data.shape, np.inf)
    stack_valid = np.zeros((len(offsets),) + data.shape, dtype=bool)
    for s, (di, dj, dk) in enumerate(offsets):
        src = tuple(
            slice(max(0, -d), data.shape[ax] - max(0, d))
            for ax, d in enumerate((di, dj, dk))
        )
        dst = tuple(
            slice(max(0, d), data.shape[ax] - max(0, -d))
            for ax, d in enumerate((di, dj, dk))
        )
        stack[s][dst] = data[src]
        stack_valid[s][dst] = valid[src]

    counts = stack_valid.sum(axis=0)
    if (counts == 0).any():
        raise EmptyNeighborhood("a voxel has no valid neighbour in its window")
    # invalid entries sort to the top; the lower median of k valid values
    # is then at sorted index (k - 1) // 2
    stack[~stack_valid] = np.inf
    stack.sort(axis=0, kind="stable")
    pick = ((counts - 1) // 2)[None, ...]
    filtered = np.take_along_axis(stack, pick, axis=0)[0]
    return SeismicVolume(
        inlines=vol.inlines.copy(),
        xlines=vol.xlines.copy(),
        t0_ms=vol.t0_ms,
        dt_ms=vol.dt_ms,
        data=filtered,
        attribute_name=vol.attribute_name,
        mask=vol.mask.copy(),
    )


def heatmap_csv(vol: SeismicVolume, inline: int) -> str:
    """Inline section as a CSV heatmap: one row per time sample, one column
    per crossline (masked voxels empty)."""
    i = vol.inline_index(inline)
    lines = ["time_ms," + ",".join(f"xline_{x}" for x in vol.xlines)]
    for k, t in enumerate(vol.times_ms):
        cells = [
            f"{vol.data[i, j, k]:.6g}" if vol.mask[i, j, k] else ""
            for j in range(len(vol.xlines))
        ]
        lines.append(f"{t:.6g}," + ",".join(cells))
    return "\n".join(lines) + "\n"
