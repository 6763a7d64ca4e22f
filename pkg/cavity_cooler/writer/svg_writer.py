import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402

from .base_writer import BaseWriter

LABELS = {
    "w": "cooling rate W [ν]",
    "n_st": "steady-state ⟨n⟩",
    "a_plus": "heating rate A₊ [ν]",
    "a_minus": "cooling rate A₋ [ν]",
}


def _extent(axis):
    if len(axis) == 1:
        return axis[0] - 0.5, axis[0] + 0.5
    return axis[0], axis[-1]


class HeatmapWriter(BaseWriter):
    """Payload: (SweepGrid, quantity). Linear colour scale, axes in units of ν."""

    suffix = ".svg"

    def render(self, payload) -> str:
        grid, quantity = payload
        values = grid.matrix(quantity)
        fig, ax = plt.subplots(figsize=(6, 4.5))
        try:
            image = ax.imshow(
                values,
                origin="lower",
                aspect="auto",
                extent=(*_extent(grid.delta_c_axis), *_extent(grid.delta_axis)),
                norm=Normalize(),
                cmap="viridis",
                interpolation="nearest",
            )
            fig.colorbar(image, ax=ax, label=LABELS.get(quantity, quantity))
            ax.set_xlabel("laser-cavity detuning δ_c [ν]")
            ax.set_ylabel("laser-molecule detuning Δ [ν]")
            ax.set_title(f"{grid.method}, Ω = {grid.base.omega:g} ν")
            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
        return buf.getvalue()
