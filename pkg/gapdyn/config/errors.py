# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


class ConfigError(ValueError):
    """Invalid scenario or constraint configuration.

    The message starts with the dotted path of the offending field when one is
    known, e.g. ``integration.dt: must be > 0``.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = "{}: {}".format(field, message)
        super(ConfigError, self).__init__(message)
