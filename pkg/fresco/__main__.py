"""Run the fresco command line: `python -m fresco`."""

from fresco.pipeline.cli import main

if __name__ == "__main__":
    main()
