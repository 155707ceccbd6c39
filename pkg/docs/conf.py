# Configuration file for the Sphinx documentation builder.
#
# http://www.sphinx-doc.org/en/master/config

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from pyconic import __version__

# -- Project information -----------------------------------------------------

project = 'PyConic'
copyright = '2026, pyconic developers'
author = 'pyconic developers'

release = __version__

# -- General configuration ---------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.autosummary', 'sphinx.ext.intersphinx', 'sphinx.ext.doctest',
              'sphinx.ext.napoleon', 'sphinx.ext.mathjax', 'sphinx-pydantic']

autodoc_default_options = {
    'members': None,
}

templates_path = ['_templates']

autosummary_generate = True

source_suffix = '.rst'

master_doc = 'index'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

intersphinx_mapping = {
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_short_title = 'pyconic'
