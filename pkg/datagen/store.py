"""Dataset directory layout: manifest.json, tree.json and raw little-endian bins."""

import json
import logging
from pathlib import Path

import numpy as np

from hierarchy.exceptions import TreeLossError
from hierarchy.tree import dump_tree, parse_tree

from .exceptions import DatasetStoreError
from .models import AnnotationField, Dataset, Fold, GeneratedImage, GenSpec, ImageRecord, SpectralImage

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
TREE_FILE = "tree.json"
CUBE_DTYPE = np.dtype("<f4")
LABEL_DTYPE = np.dtype("<i4")


class DatasetRepository:
    """Read and write datasets as plain files."""

    @classmethod
    def save(cls, dataset: Dataset, directory: str | Path) -> list[Path]:
        """Write the dataset; returns every file written, manifest last."""
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        written = []

        tree_path = root / TREE_FILE
        tree_path.write_text(dump_tree(dataset.tree) + "\n", encoding="utf-8")
        written.append(tree_path)

        records = []
        for i, image in enumerate(dataset.images):
            values = image.image.values
            record = ImageRecord(
                cube=f"image_{i:04d}.cube.bin",
                labels=f"image_{i:04d}.labels.bin",
                height=values.shape[0],
                width=values.shape[1],
                bands=values.shape[2],
                ood_labels=f"image_{i:04d}.ood.bin" if image.ood_annotation is not None else None,
            )
            written.append(cls._write_array(root / record.cube, values, CUBE_DTYPE))
            written.append(cls._write_array(root / record.labels, image.annotation.labels, LABEL_DTYPE))
            if record.ood_labels is not None:
                written.append(
                    cls._write_array(root / record.ood_labels, image.ood_annotation.labels, LABEL_DTYPE)
                )
            records.append(record.to_record())

        manifest = {
            "images": records,
            "tree": TREE_FILE,
            "splits": [fold.to_record() for fold in dataset.splits],
        }
        if dataset.spec is not None:
            manifest["spec"] = dataset.spec.to_dict()
        manifest_path = root / MANIFEST
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(manifest_path)

        logger.info("Saved %d images to %s", len(dataset.images), root)
        return written

    @classmethod
    def load(cls, directory: str | Path) -> Dataset:
        root = Path(directory)
        manifest_path = root / MANIFEST
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise DatasetStoreError(f"Cannot read {manifest_path}: {e}", path=str(manifest_path), original_error=e) from e

        tree_path = root / manifest.get("tree", TREE_FILE)
        try:
            tree = parse_tree(tree_path.read_text(encoding="utf-8"))
        except OSError as e:
            raise DatasetStoreError(f"Cannot read {tree_path}: {e}", path=str(tree_path), original_error=e) from e

        images = []
        for raw in manifest.get("images", []):
            record = ImageRecord.from_record(raw)
            shape = (record.height, record.width)
            cube = cls._read_array(root / record.cube, CUBE_DTYPE, (*shape, record.bands))
            labels = cls._read_array(root / record.labels, LABEL_DTYPE, shape)
            ood = None
            if record.ood_labels is not None:
                ood = AnnotationField(cls._read_array(root / record.ood_labels, LABEL_DTYPE, shape))
            images.append(GeneratedImage(SpectralImage(cube), AnnotationField(labels), ood))

        spec = None
        if "spec" in manifest:
            try:
                spec = GenSpec.from_dict(manifest["spec"])
            except TreeLossError as e:
                raise DatasetStoreError(f"Invalid spec in {manifest_path}: {e}", path=str(manifest_path), original_error=e) from e
        splits = [Fold.from_record(fold) for fold in manifest.get("splits", [])]
        return Dataset(tree=tree, images=images, spec=spec, splits=splits)

    @staticmethod
    def _write_array(path: Path, values: np.ndarray, dtype: np.dtype) -> Path:
        path.write_bytes(np.ascontiguousarray(values, dtype=dtype).tobytes())
        return path

    @staticmethod
    def _read_array(path: Path, dtype: np.dtype, shape: tuple[int, ...]) -> np.ndarray:
        try:
            data = np.frombuffer(path.read_bytes(), dtype=dtype)
        except OSError as e:
            raise DatasetStoreError(f"Cannot read {path}: {e}", path=str(path), original_error=e) from e
        expected = int(np.prod(shape))
        if data.size != expected:
            raise DatasetStoreError(
                f"{path.name} holds {data.size} values, manifest expects {expected}", path=str(path)
            )
        return data.reshape(shape).astype(dtype.newbyteorder("="))
