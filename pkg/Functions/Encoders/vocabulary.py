"""
Vocabulario compartido del mundo sintético: paleta, formas, tamaños y las
palabras que los nombran. Lo usan el generador sintético, el embedder toy y
el clasificador toy, así que las tres piezas hablan el mismo idioma.
"""

from typing import Dict, Tuple

# todos los colores tienen canal máximo 1: la cobertura se lee como max(RGB)
PALETTE: Dict[str, Tuple[float, float, float]] = {
    "red": (1.0, 0.0, 0.0),
    "green": (0.0, 1.0, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "yellow": (1.0, 1.0, 0.0),
    "cyan": (0.0, 1.0, 1.0),
    "magenta": (1.0, 0.0, 1.0),
}
COLOR_NAMES = tuple(PALETTE)

SHAPES = ("square", "circle", "diamond")
# área / área del bounding box
SHAPE_FILL_RATIOS = {"square": 1.0, "circle": 0.785398, "diamond": 0.5}

SIZES_PX = (8, 12, 16)
SIZE_NAMES = ("small", "medium", "large")

DIRECTION_WORDS = ("left", "right", "up", "down", "still")

STOPWORDS = frozenset({
    "a", "an", "the", "is", "are", "moving", "moves", "and", "then",
    "of", "to", "in", "on", "with", "towards", "toward", "shape",
})


def direction_word(velocity: Tuple[float, float]) -> str:
    """Palabra dominante para una velocidad (vx, vy) en px/frame (y hacia abajo)."""
    vx, vy = velocity
    if abs(vx) < 0.25 and abs(vy) < 0.25:
        return "still"
    if abs(vx) >= abs(vy):
        return "right" if vx > 0 else "left"
    return "down" if vy > 0 else "up"
