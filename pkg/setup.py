# setup.py

from setuptools import setup, find_packages


deps = [
    "numpy>=2.1",
    "scipy>=1.15",
    "scikit-learn>=1.6",
    "pandas>=2.2",
    "cachetools>=5.5",
    "tqdm>=4.67",
]

setup(
    name="vegcast",
    version="0.1.0",
    packages=find_packages("."),
    package_dir={"": "."},
    install_requires=deps,
    extras_require={"test": ["pytest>=8.0"]},
    entry_points={
        'console_scripts': [
            'vegcast = vegcast.client:main'
        ]
    },
)
