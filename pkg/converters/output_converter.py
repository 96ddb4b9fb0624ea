"""
Output format converters for reconstruction, validation and campaign data.
"""
import json
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from meshing import Mesh


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def _config_comment(config: Optional[Dict[str, Any]]) -> str:
    if config is None:
        return ""
    return "# config: " + json.dumps(config, sort_keys=True, default=_json_default) + "\n"


class OutputConverter:
    """Converts run data to the on-disk formats."""

    @staticmethod
    def to_json(data: Dict[str, Any]) -> str:
        """Sorted-key JSON; identical data gives identical text."""
        return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default) + "\n"

    @staticmethod
    def dataframe_to_csv(frame: pd.DataFrame, config: Optional[Dict[str, Any]] = None) -> str:
        """CSV text preceded by a `# config:` comment line."""
        return _config_comment(config) + frame.to_csv(index=False, float_format="%.12e", lineterminator="\n")

    @staticmethod
    def fields_frame(mesh: Mesh, aggregated: Sequence[float],
                     per_measurement: Sequence[Sequence[float]] = ()) -> pd.DataFrame:
        """Columns x, y, G, G_1..G_n."""
        columns = {'x': mesh.nodes[:, 0], 'y': mesh.nodes[:, 1], 'G': np.asarray(aggregated)}
        if len(per_measurement) > 1:
            for i, values in enumerate(per_measurement, start=1):
                columns[f'G_{i}'] = np.asarray(values)
        return pd.DataFrame(columns)

    @staticmethod
    def fields_to_csv(mesh: Mesh, aggregated: Sequence[float], per_measurement: Sequence[Sequence[float]] = (),
                      config: Optional[Dict[str, Any]] = None) -> str:
        frame = OutputConverter.fields_frame(mesh, aggregated, per_measurement)
        return OutputConverter.dataframe_to_csv(frame, config)

    @staticmethod
    def runs_to_csv(runs: pd.DataFrame, config: Optional[Dict[str, Any]] = None) -> str:
        return OutputConverter.dataframe_to_csv(runs, config)

    @staticmethod
    def measurement_to_csv(angles: Sequence[float], values: Sequence[float], source: str,
                           mask: Optional[List[List[float]]] = None,
                           config: Optional[Dict[str, Any]] = None) -> str:
        """`angle,value` rows with source, mask and config comment lines."""
        header = f"# source: {source}\n# mask: {json.dumps(mask)}\n" + _config_comment(config)
        frame = pd.DataFrame({'angle': np.asarray(angles), 'value': np.asarray(values)})
        return header + frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")

    @staticmethod
    def to_gnuplot(csv_name: str, title: str = "Topological gradient",
                   center: Optional[Sequence[float]] = None) -> str:
        """Script stub plotting the G column of a fields CSV."""
        lines = [
            "# gnuplot script",
            "set datafile separator ','",
            "set datafile commentschars '#'",
            "set size ratio -1",
            "set palette rgbformulae 33,13,10",
            f"set title '{title}'",
        ]
        if center is not None:
            lines.append(f"set label 1 at {center[0]:.6f},{center[1]:.6f} point pt 7 ps 1.5 lc rgb 'black'")
        lines.append(f"plot '{csv_name}' skip 2 using 1:2:3 with points pt 7 ps 0.3 palette notitle")
        return "\n".join(lines) + "\n"

    @staticmethod
    def get_supported_formats() -> List[str]:
        """Get list of supported output formats."""
        return ['json', 'csv', 'gnuplot', 'timings']

    @staticmethod
    def convert(data: Any, format_type: str) -> str:
        """
        Convert data to the specified format.

        json and timings take a dictionary, csv a DataFrame, gnuplot a dictionary
        with 'csv' and optional 'title' / 'center' entries.
        """
        format_type = format_type.lower()

        if format_type in ('json', 'timings'):
            return OutputConverter.to_json(data)
        elif format_type == 'csv':
            return OutputConverter.dataframe_to_csv(data)
        elif format_type == 'gnuplot':
            return OutputConverter.to_gnuplot(data['csv'], data.get('title', 'Topological gradient'),
                                              data.get('center'))
        else:
            raise ValueError(f"Unsupported format: {format_type}, "
                             f"choose from {', '.join(OutputConverter.get_supported_formats())}")

    @staticmethod
    def get_file_extension(format_type: str) -> str:
        """Get appropriate file extension for format."""
        extensions = {
            'json': '.json',
            'csv': '.csv',
            'gnuplot': '.gp',
            'timings': '_timings.json',
        }
        return extensions.get(format_type.lower(), '.txt')
