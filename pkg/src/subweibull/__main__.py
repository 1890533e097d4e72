"""
Entry point for python -m subweibull
"""

from .main import main

if __name__ == "__main__":
    main()
