"""Autonomy stack for a ring-collecting competition robot.

Subpackages:

- :mod:`ringbot.geometry`: camera and field coordinate transforms
- :mod:`ringbot.vision`: HSV/blur/mask preprocessing and ring detection
- :mod:`ringbot.sim`: deterministic 2D game-field simulation
- :mod:`ringbot.policy`: scripted controllers and the remote-policy adapter
- :mod:`ringbot.link`: brain/coprocessor packet protocol
"""

__version__ = "0.1.0"
