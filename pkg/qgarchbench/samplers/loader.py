import importlib
import os
import pathlib
from typing import List

SAMPLER_DIR = pathlib.Path(__file__).parent


def _dir_contains_file(dir, file_name) -> bool:
    names = map(lambda x: x.name, filter(lambda x: x.is_file(), dir.iterdir()))
    return file_name in names


def _list_sampler_paths() -> List[str]:
    # Only load the sampler directories that contain a "__init__.py" file
    return sorted(
        str(child.absolute())
        for child in SAMPLER_DIR.iterdir()
        if child.is_dir() and _dir_contains_file(child, "__init__.py")
    )


def list_samplers() -> List[str]:
    return list(map(lambda y: os.path.basename(y), _list_sampler_paths()))


def load_sampler_by_name(sampler_name: str):
    matches = [name for name in list_samplers() if name.lower() == sampler_name.lower()]
    if not matches:
        raise KeyError(
            f"{sampler_name} is not a registered sampler. Available: {list_samplers()}"
        )
    assert (
        len(matches) == 1
    ), f"Found more than one sampler {matches} matching the required name: {sampler_name}"
    module = importlib.import_module(f".{matches[0]}", package=__package__)
    Sampler = getattr(module, "Sampler", None)
    if Sampler is None:
        raise AttributeError(f"{module} does not define attribute Sampler")
    return Sampler
