# weaktrace/__main__.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from .cli import main

main()
