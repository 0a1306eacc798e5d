from pathlib import Path
from typing import Union

import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()


def read_requirements(path: Union[str, Path]):
    with open(path, "r") as file:
        return [line for line in file.read().splitlines() if line.strip()]


requirements = read_requirements("requirements.txt")
requirements_dev = read_requirements("requirements_dev.txt")

setuptools.setup(
    name="InvoiceReader",
    version="0.1.0",
    author="InvoiceReader team",
    description="Layout analysis and metadata extraction for OCR-scanned invoices",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=("tests", "examples", "examples.*")),
    package_data={
        "InvoiceReader": [
            "config/*.json",
            "config/*.txt",
            "config/keywords/*/*.json",
            "config/gazetteers/*/*.txt",
            "config/rules/*.rules",
            "corpus/templates/*.json",
            "corpus/values/*.json",
        ]
    },
    install_requires=requirements,
    extras_require={"dev": requirements_dev},
    entry_points={"console_scripts": ["invoicereader=InvoiceReader.InvoiceReaderCLI:main"]},
    python_requires=">=3.8",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Operating System :: OS Independent",
    ],
)
