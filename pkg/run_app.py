#!/usr/bin/env python3
"""Script simple para ejecutar la línea de comandos de MindKit."""

import sys

from AppBuild.APP import main

if __name__ == "__main__":
    sys.exit(main())
