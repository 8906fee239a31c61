#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
from __future__ import absolute_import

from symbext.shared_variables import *
from symbext.namespace import *
from symbext.log import *
from symbext.wrappers import *
from symbext.file_operations import *
from symbext.process_helpers import *
from symbext.dynamics import *
from symbext.lyapunov import *
from symbext.curves import *
from symbext.combinatorics import *
from symbext.entropy import *
from symbext.reparametrization import *
from symbext.bounds import *
from symbext.experiments import *
from symbext.cli import *

__author__ = "Symbext Developers"
__version__ = "1.0.0"
