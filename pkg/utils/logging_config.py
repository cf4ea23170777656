import logging
import os
import sys

from dotenv import load_dotenv

load_dotenv()

RESULT = 35

_PACKAGES = ("core", "policy", "rl", "sim", "report", "cli")


def addLoggingLevel(levelName, levelNum, methodName=None):
	"""
	Adds a new logging level to the `logging` module and the current logger class.

	`levelName` becomes an attribute of `logging` with the value `levelNum`;
	`methodName` (default `levelName.lower()`) becomes a method on both.
	Raises `AttributeError` if either name is already taken.
	"""
	if not methodName:
		methodName = levelName.lower()

	if hasattr(logging, levelName):
		raise AttributeError(f'{levelName} already defined in logging module')
	if hasattr(logging, methodName):
		raise AttributeError(f'{methodName} already defined in logging module')
	if hasattr(logging.getLoggerClass(), methodName):
		raise AttributeError(f'{methodName} already defined in logger class')

	def logForLevel(self, message, *args, **kwargs):
		if self.isEnabledFor(levelNum):
			self._log(levelNum, message, args, **kwargs)

	def logToRoot(message, *args, **kwargs):
		logging.log(levelNum, message, *args, **kwargs)

	logging.addLevelName(levelNum, levelName)
	setattr(logging, levelName, levelNum)
	setattr(logging.getLoggerClass(), methodName, logForLevel)
	setattr(logging, methodName, logToRoot)


def setup_logging(level: str | None = None):
	"""Single stdout handler; OFFLOAD_LOGGING_LEVEL picks result, info (default) or debug."""
	try:
		addLoggingLevel('RESULT', RESULT)
	except AttributeError:
		pass

	log_type = (level or os.getenv('OFFLOAD_LOGGING_LEVEL', 'info')).lower()

	root = logging.getLogger()
	if root.hasHandlers():
		return

	class OffloadFormatter(logging.Formatter):
		def format(self, record):
			# sim.engine -> sim
			if isinstance(record.name, str) and record.name.split('.')[0] in _PACKAGES:
				record.name = record.name.split('.')[0]
			return super().format(record)

	console = logging.StreamHandler(sys.stdout)
	if log_type == 'result':
		console.setLevel('RESULT')
		console.setFormatter(OffloadFormatter('%(message)s'))
	else:
		console.setFormatter(OffloadFormatter('%(levelname)-8s [%(name)s] %(message)s'))
	root.addHandler(console)

	if log_type == 'result':
		root.setLevel('RESULT')
	elif log_type == 'debug':
		root.setLevel(logging.DEBUG)
	elif log_type == 'warning':
		root.setLevel(logging.WARNING)
	else:
		root.setLevel(logging.INFO)

	for logger_name in ('asyncio', 'matplotlib', 'numpy'):
		third_party = logging.getLogger(logger_name)
		third_party.setLevel(logging.ERROR)
		third_party.propagate = False
