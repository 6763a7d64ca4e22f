from cavity_cooler.writer.csv_writer import (
    ConvergenceWriter,
    MoleculeWriter,
    OmegaScanCellsWriter,
    OmegaScanWriter,
    RatesWriter,
    SweepWriter,
    TrajectoryWriter,
)
from cavity_cooler.writer.manifest_writer import ManifestWriter
from cavity_cooler.writer.svg_writer import HeatmapWriter

WRITER_DICT = {
    "trajectory": TrajectoryWriter,
    "rates": RatesWriter,
    "sweep": SweepWriter,
    "omega_scan": OmegaScanWriter,
    "omega_scan_cells": OmegaScanCellsWriter,
    "molecules": MoleculeWriter,
    "convergence": ConvergenceWriter,
    "heatmap": HeatmapWriter,
    "manifest": ManifestWriter,
}
