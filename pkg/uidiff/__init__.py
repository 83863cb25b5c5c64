# -*- coding: utf-8 -*-
from .config import get_cfg

__version__ = "0.1.0"
