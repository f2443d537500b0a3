# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
"""Central version metadata for weaktrace."""

VERSION = "0.1.0"
__version__ = VERSION
