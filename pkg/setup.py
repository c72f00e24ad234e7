import setuptools
import setuptools_scm

setuptools.setup(version=setuptools_scm.get_version(write_to="python/lsst/ts/hvlab/version.py", fallback_version="0.0.0"))
