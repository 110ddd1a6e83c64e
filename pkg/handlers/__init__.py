# Handlers package

from dataclasses import dataclass

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2


@dataclass
class CommandResult:
    """Код возврата и текст для stdout"""
    exit_code: int = EXIT_OK
    message: str = ""
