from setuptools import find_packages, setup


setup(
    name="ph-bloch",
    version="0.1.0",
    description="Numerical toolkit for pluriharmonic mappings (generalized volume, Landau-Bloch radii, univalence and stability scans).",
    package_dir={"": "src"},
    packages=find_packages("src"),
    python_requires=">=3.9",
    install_requires=[
        "pydantic>=2.6",
        "pydantic-settings>=2.2",
        "tenacity>=8.2",
        "structlog>=24.1",
        "rich>=13.7",
        "typer>=0.12",
        "numpy>=1.24",
        "scipy>=1.10",
    ],
    extras_require={
        "dev": ["pytest>=8.0", "ruff>=0.6", "mypy>=1.8"],
    },
    entry_points={"console_scripts": ["ph-bloch=ph_bloch.cli:app"]},
)
