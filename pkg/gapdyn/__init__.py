# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

__title__ = "gapdyn"
__version__ = "2021.6"
__author__ = "gapdyn developers"
__license__ = "MIT"
__copyright__ = "Copyright 2021-present gapdyn developers."

# Synonyms
TITLE = __title__
VERSION = __version__
AUTHOR = __author__
LICENSE = __license__
COPYRIGHT = __copyright__
