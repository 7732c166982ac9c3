"""sitblend: blend 2D data visualisations into photographs of real environments.

The pipeline renders a chart from a small declarative spec, extracts a
black-and-white outline control map, registers it into a background photo,
drives a diffusion backend with two conditional controls (style + outline),
optionally tile-upscales the result, and measures how legible the encoded
data remains.
"""

__version__ = "0.1.0"
