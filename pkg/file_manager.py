"""
Run directory management: measurement files, manifest, reports and checksums.
"""
import hashlib
import io
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from converters import OutputConverter
from exceptions import MeasurementFileError, PreconditionError
from fem import parse_source
from meshing import BoundaryPartition, Mesh
from reconstruction import Measurement

_LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
ANGLE_TOL = 1e-9


def file_md5(path: Path) -> str:
    return hashlib.md5(path.read_bytes()).hexdigest()


class RunFileManager:
    """Manages the files of one run directory."""

    def __init__(self, output_dir: str = "runs"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.supported_extensions = {'.json', '.csv', '.gp', '.txt'}

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def write_text(self, name: str, text: str) -> Path:
        path = self.path(name)
        path.write_text(text)
        return path

    def write_report(self, stem: str, payload: Dict[str, Any],
                     timings: Optional[Dict[str, float]] = None) -> Path:
        """
        Write `<stem>.json` and, when timings are given, the sidecar `<stem>_timings.json`.

        Returns:
            Path to the report
        """
        path = self.write_text(stem + OutputConverter.get_file_extension('json'),
                               OutputConverter.convert(payload, 'json'))
        if timings is not None:
            self.write_text(stem + OutputConverter.get_file_extension('timings'),
                            OutputConverter.convert(timings, 'timings'))
        return path

    def write_measurements(self, mesh: Mesh, measurements: List[Measurement], config: Dict[str, Any],
                           extra: Optional[Dict[str, Any]] = None) -> Path:
        """
        Write one `angle,value` CSV per measurement and the manifest listing them.

        The manifest records the md5 checksum of every data file.
        """
        entries = []
        angles = mesh.boundary_angles
        for i, m in enumerate(measurements):
            safe = "".join(ch if ch.isalnum() else "_" for ch in m.source.key).strip("_")
            name = f"measurement_{i:02d}_{safe}.csv"
            mask = m.mask.to_dict()['arcs'] if m.mask is not None else None
            path = self.write_text(name, OutputConverter.measurement_to_csv(
                angles, m.boundary_data, m.source.key, mask, config))
            entries.append({'file': name, 'source': m.source.key, 'mask': mask,
                            'n_values': int(len(m.boundary_data)), 'md5': file_md5(path)})
        manifest = {'config': config, 'mesh_id': mesh.mesh_id, 'measurements': entries}
        manifest.update(extra or {})
        path = self.write_report(MANIFEST_NAME[:-len('.json')], manifest)
        _LOGGER.info("Wrote %d measurement files to %s", len(entries), self.output_dir)
        return path

    def read_manifest(self) -> Dict[str, Any]:
        path = self.path(MANIFEST_NAME)
        try:
            return json.loads(path.read_text())
        except FileNotFoundError:
            raise MeasurementFileError(f"no manifest in {self.output_dir}; run `generate` first")
        except json.JSONDecodeError as e:
            raise MeasurementFileError(f"{path}: invalid manifest: {e}")

    def read_measurement(self, name: str, mesh: Mesh, expected_md5: Optional[str] = None) -> Measurement:
        """
        Parse a measurement CSV and check it against the reconstruction mesh.

        Raises:
            MeasurementFileError: missing file, checksum mismatch, malformed rows or
                angles that do not match the mesh boundary nodes
        """
        path = self.path(name)
        if not path.exists():
            raise MeasurementFileError(f"{path}: file not found")
        if expected_md5 is not None and file_md5(path) != expected_md5:
            raise MeasurementFileError(f"{path}: checksum mismatch, file was modified after generation")
        text = path.read_text()
        header = {}
        for line in text.splitlines():
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        if 'source' not in header:
            raise MeasurementFileError(f"{path}: missing '# source:' header")
        try:
            frame = pd.read_csv(io.StringIO(text), comment="#")
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise MeasurementFileError(f"{path}: cannot parse CSV: {e}")
        if list(frame.columns) != ['angle', 'value']:
            raise MeasurementFileError(f"{path}: expected columns angle,value, found {list(frame.columns)}")
        try:
            angles = frame['angle'].to_numpy(dtype=np.float64)
            values = frame['value'].to_numpy(dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise MeasurementFileError(f"{path}: non-numeric entry: {e}")
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(values))):
            bad = int(np.flatnonzero(~(np.isfinite(angles) & np.isfinite(values)))[0])
            raise MeasurementFileError(f"{path}: row {bad + 1} is not finite")
        if len(values) != len(mesh.boundary_nodes):
            raise MeasurementFileError(
                f"{path}: {len(values)} rows, mesh {mesh.mesh_id} has {len(mesh.boundary_nodes)} boundary nodes")
        if np.max(np.abs(angles - mesh.boundary_angles)) > ANGLE_TOL:
            raise MeasurementFileError(f"{path}: angles do not match the boundary nodes of mesh {mesh.mesh_id}")
        try:
            source = parse_source(header['source'])
            arcs = json.loads(header.get('mask', 'null'))
            mask = BoundaryPartition(tuple(tuple(a) for a in arcs)) if arcs else None
        except (PreconditionError, ValueError) as e:
            raise MeasurementFileError(f"{path}: invalid header: {e}")
        return Measurement(source, values, mask)

    def load_measurements(self, mesh: Mesh) -> List[Measurement]:
        manifest = self.read_manifest()
        if manifest.get('mesh_id') not in (None, mesh.mesh_id):
            raise MeasurementFileError(
                f"measurements were generated for mesh {manifest.get('mesh_id')}, not {mesh.mesh_id}")
        entries = manifest.get('measurements') or []
        if not entries:
            raise MeasurementFileError("manifest lists no measurement files")
        return [self.read_measurement(e['file'], mesh, e.get('md5')) for e in entries]

    def get_run_files(self) -> List[Dict[str, Any]]:
        """
        Get list of all files of the run with metadata.

        Returns:
            List of dictionaries containing file information
        """
        files = []
        for file_path in sorted(self.output_dir.iterdir()):
            if file_path.is_file() and file_path.suffix.lower() in self.supported_extensions:
                stat = file_path.stat()
                files.append({
                    'filename': file_path.name,
                    'size': stat.st_size,
                    'modified': datetime.fromtimestamp(stat.st_mtime),
                    'extension': file_path.suffix.lower(),
                })
        return files

    def get_storage_info(self) -> Dict[str, Any]:
        """
        Get storage information for the run directory.

        Returns:
            Dictionary with storage statistics
        """
        files = self.get_run_files()
        total_size = sum(f['size'] for f in files)
        return {
            'total_files': len(files),
            'total_size': total_size,
            'total_size_mb': round(total_size / (1024 * 1024), 2),
            'output_dir': str(self.output_dir),
        }
