from setuptools import setup

setup(
    name='bloheat',
    version='0.1.0',
    description='Heat-semigroup characterizations of BLO functions: norms, weights, square functions, PDE checks',
    packages=['bloheat'],
    package_data={'bloheat': ['default_config.yaml']},
    install_requires=['numpy', 'pandas', 'scipy', 'pyyaml'],
    extras_require={'test': ['pytest', 'hypothesis']},
    entry_points={'console_scripts': ['bloheat=bloheat.Cli:main']},
    python_requires='>=3.8',
)
