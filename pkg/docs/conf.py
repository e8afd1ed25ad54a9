#!/usr/bin/env python
#
# ble_energy_model documentation build configuration file.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

import ble_energy_model  # noqa: E402

# -- General configuration ---------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx_autodoc_typehints',
]
autodoc_member_order = 'bysource'

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'BLE energy model'
copyright = "2021, Patrick Boettcher"
author = "Patrick Boettcher"

version = ble_energy_model.__version__
release = ble_energy_model.__version__

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

# -- HTML output --------------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'ble_energy_modeldoc'

# -- Other builders -----------------------------------------------------

latex_documents = [
    (master_doc, 'ble_energy_model.tex', 'BLE energy model Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'ble_energy_model', 'BLE energy model Documentation', [author], 1),
]
texinfo_documents = [
    (master_doc, 'ble_energy_model', 'BLE energy model Documentation', author, 'ble_energy_model',
     'Energy consumption and neighbor-discovery latency model of Bluetooth Low Energy devices.',
     'Science'),
]
