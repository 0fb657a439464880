"""
Numerical lab for Q_alpha spaces, their heat-extension duals and mild Navier-Stokes solutions.
"""
import os.path

from setuptools import setup, find_packages

version = '1.0.0'

long_description = """
qnslab measures the scale-invariant function space norms used in the small-data theory of
the incompressible Navier-Stokes equations (Q_alpha, Q_alpha^{-1}, Morrey, Campanato, Besov)
on periodic grids, checks the Duhamel and bilinear estimates they rest on, and solves the
mild formulation by Picard iteration with per-iteration diagnostics.

All results are written as plain CSV/JSON tables plus QNSF1/QNST1 field files, together with a
manifest that allows any run to be recomputed and checked.


"""


def read(fname):
    with open(os.path.join(os.path.dirname(__file__), fname)) as f:
        return f.read()


setup(
    name='qnslab',
    version=version,
    description=__doc__.strip(),
    long_description=long_description + read('docs/news.txt'),
    keywords='navier-stokes morrey campanato carleson spectral heat-semigroup',
    license='Apache',
    author='qnslab contributors',
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    package_dir={'qnslab': 'qnslab'},
    package_data={'qnslab': ['config/*.cfg*']},
    zip_safe=False,  # defaults.cfg is read from the package directory.
    include_package_data=True,
    install_requires=read('requirements/prod.txt').splitlines(),
    extras_require={
        'test': read('requirements/test.txt').splitlines(),
    },
    python_requires='>=3.6',
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    entry_points="""
    [console_scripts]
    qnslab = qnslab.start:main
    """,
)
