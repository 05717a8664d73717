"""Setup script for superframes."""

from setuptools import find_packages, setup

setup(
    name="superframes",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "click>=8.1.7",
        "pydantic>=2.6.0",
        "tqdm>=4.66.0",
        "numpy<2.0",
        "pillow>=10.0.0",
        "python-dotenv>=1.0.0",
        "tomli>=2.0.1; python_version < '3.11'",
    ],
    entry_points={
        "console_scripts": [
            "superframes=superframes.cli:main",
        ],
    },
)
