"""Bundled example knowledge bases."""
from importlib import resources

NAMES = ("ramnavami", "lecture", "restaurant", "belief", "quantifier")


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.kb").read_text(encoding="utf-8")


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.kb")


def load(name: str):
    from ..dsl import load as load_text

    hkb, diags = load_text(text(name))
    if hkb is None:
        raise ValueError(f"fixture {name} failed to load: " + "; ".join(map(str, diags)))
    return hkb
